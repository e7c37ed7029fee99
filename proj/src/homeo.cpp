#include "homconj/homeo.hpp"

#include <algorithm>
#include <stdexcept>

namespace homconj {

MapPrimitive::MapPrimitive(std::string name, Fn forward, Fn inverse)
    : name_(std::move(name)), forward_(std::move(forward)), inverse_(std::move(inverse)) {
    if (!forward_ || !inverse_) throw std::invalid_argument("primitive " + name_ + " needs forward and inverse maps");
}

Homeo::Homeo(Domain domain) : domain_(std::move(domain)), label_("id") {}

Homeo::Homeo(Domain domain, std::shared_ptr<const MapPrimitive> prim, std::string label)
    : domain_(std::move(domain)), label_(std::move(label)) {
    if (!prim) throw std::invalid_argument("null primitive");
    if (label_.empty()) label_ = prim->name();
    chain_.push_back(Atom{std::move(prim), false});
}

Homeo::Homeo(Domain domain, std::string name, MapPrimitive::Fn forward, MapPrimitive::Fn inverse)
    : Homeo(std::move(domain), std::make_shared<const MapPrimitive>(name, std::move(forward), std::move(inverse)),
            name) {}

Homeo::Homeo(Domain domain, std::vector<Atom> chain, std::string label)
    : domain_(std::move(domain)), chain_(std::move(chain)), label_(std::move(label)) {}

Point Homeo::forward(const Point& x) const {
    Point y = x;
    for (const Atom& a : chain_) y = a.apply(y);
    return y;
}

Point Homeo::inverse(const Point& x) const {
    Point y = x;
    for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) y = it->flipped().apply(y);
    return y;
}

Homeo Homeo::inverted() const {
    std::vector<Atom> chain;
    chain.reserve(chain_.size());
    for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) chain.push_back(it->flipped());
    return Homeo(domain_, std::move(chain), label_ + "^-1");
}

Homeo Homeo::reduced() const {
    std::vector<Atom> stack;
    stack.reserve(chain_.size());
    for (const Atom& a : chain_) {
        if (!stack.empty() && stack.back().cancels(a)) {
            stack.pop_back();
        } else {
            stack.push_back(a);
        }
    }
    return Homeo(domain_, std::move(stack), label_);
}

Homeo& Homeo::set_label(std::string label) {
    label_ = std::move(label);
    return *this;
}

Homeo compose(const Homeo& f, const Homeo& g) {
    if (!(f.domain_ == g.domain_)) {
        throw DomainMismatch("cannot compose " + f.label_ + " and " + g.label_ + ": different domains");
    }
    std::vector<Atom> chain = g.chain_;
    chain.insert(chain.end(), f.chain_.begin(), f.chain_.end());
    std::string label = f.label_ + " o " + g.label_;
    if (g.chain_.empty()) label = f.label_;
    if (f.chain_.empty()) label = g.label_;
    return Homeo(f.domain_, std::move(chain), std::move(label));
}

Homeo invert(const Homeo& f) { return f.inverted(); }

Homeo power(const Homeo& f, int n) {
    Homeo base = n < 0 ? f.inverted() : f;
    Homeo out(f.domain());
    for (int i = 0; i < std::abs(n); ++i) out = compose(base, out);
    return out;
}

RoundTripReport check_round_trip(const Homeo& f, const std::vector<Point>& cloud, double tau_inv) {
    RoundTripReport rep;
    const Domain& dom = f.domain();
    bool have = false;
    auto observe = [&](const Point& x, const Point& back) {
        const double err = dom.norm_of(back - x) / (1.0 + dom.norm_of(x));
        if (!have || err > rep.worst_error) {
            rep.worst_error = err;
            rep.worst_point = x;
            have = true;
        }
    };
    for (const Point& x : cloud) {
        const Point y = f.forward(x);
        if (!dom.contains(y)) {
            ++rep.range_failures;
        } else {
            observe(x, f.inverse(y));
        }
        const Point z = f.inverse(x);
        if (!dom.contains(z)) {
            ++rep.range_failures;
        } else {
            observe(x, f.forward(z));
        }
    }
    rep.passed = rep.worst_error <= tau_inv && rep.range_failures == 0;
    return rep;
}

} // namespace homconj
