#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homconj/funcspace.hpp"
#include "homconj/point.hpp"

namespace homconj {

/// A primitive homeomorphism: a closed-form (forward, inverse) pair.
class MapPrimitive {
public:
    using Fn = std::function<Point(const Point&)>;

    MapPrimitive(std::string name, Fn forward, Fn inverse);

    Point forward(const Point& x) const { return forward_(x); }
    Point inverse(const Point& x) const { return inverse_(x); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    Fn forward_;
    Fn inverse_;
};

/// One entry of a composition chain: a primitive used forward or inverted.
struct Atom {
    std::shared_ptr<const MapPrimitive> prim;
    bool inverted = false;

    Point apply(const Point& x) const { return inverted ? prim->inverse(x) : prim->forward(x); }
    Atom flipped() const { return {prim, !inverted}; }
    /// True when this atom and `other` cancel: same primitive, opposite direction.
    bool cancels(const Atom& other) const { return prim == other.prim && inverted != other.inverted; }
};

/// A homeomorphism of F represented as a lazy composition chain of atoms.
/// The chain is stored in application order: chain()[0] acts first.
class Homeo {
public:
    /// Identity of the domain (empty chain; evaluates exactly).
    explicit Homeo(Domain domain);
    Homeo(Domain domain, std::shared_ptr<const MapPrimitive> prim, std::string label = {});
    Homeo(Domain domain, std::string name, MapPrimitive::Fn forward, MapPrimitive::Fn inverse);

    Point operator()(const Point& x) const { return forward(x); }
    Point forward(const Point& x) const;
    Point inverse(const Point& x) const;

    Homeo inverted() const;
    /// Chain with adjacent (atom, atom^-1) pairs cancelled. Evaluates to the
    /// same map, exactly where the unreduced chain would round.
    Homeo reduced() const;

    const Domain& domain() const { return domain_; }
    const std::vector<Atom>& chain() const { return chain_; }
    std::size_t chain_length() const { return chain_.size(); }
    bool is_identity_chain() const { return chain_.empty(); }

    const std::string& label() const { return label_; }
    Homeo& set_label(std::string label);

    /// f o g: forward = f(g(x)), inverse = g^-1(f^-1(x)), chains concatenated.
    friend Homeo compose(const Homeo& f, const Homeo& g);

private:
    Homeo(Domain domain, std::vector<Atom> chain, std::string label);

    Domain domain_;
    std::vector<Atom> chain_;
    std::string label_;
};

Homeo compose(const Homeo& f, const Homeo& g);
Homeo invert(const Homeo& f);
/// f composed with itself n times; negative n uses the inverse.
Homeo power(const Homeo& f, int n);

struct RoundTripReport {
    double worst_error = 0.0;   ///< max ||f^-1(f(x)) - x|| / (1 + ||x||) over both directions
    Point worst_point;
    std::size_t range_failures = 0; ///< samples whose image left F
    bool passed = true;
};

/// Round-trip and range-containment invariants of a homeomorphism on a cloud.
RoundTripReport check_round_trip(const Homeo& f, const std::vector<Point>& cloud, double tau_inv);

} // namespace homconj
