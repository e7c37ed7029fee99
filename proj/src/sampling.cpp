#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "homconj/funcspace.hpp"

namespace homconj {

void SampleScheme::validate() const {
    if (!(window_radius > 0.0) || !std::isfinite(window_radius)) {
        throw std::invalid_argument("window_radius must be positive and finite");
    }
    if (grid_points_per_axis < 1) throw std::invalid_argument("grid_points_per_axis must be positive");
    if (quasirandom_count < 0) throw std::invalid_argument("quasirandom_count must be nonnegative");
    if (geometric_points < 0) throw std::invalid_argument("geometric_points must be nonnegative");
    if (exhaustion_levels < 1) throw std::invalid_argument("exhaustion_levels must be positive");
}

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

namespace {

constexpr std::array<unsigned, kMaxDim + 1> kHaltonBases{2, 3, 5, 7, 11};

std::vector<double> axis_nodes(const Interval& bound, double w, int n, bool open_lower) {
    const double lo = std::max(bound.lo, -w);
    const double hi = std::min(bound.hi, w);
    std::vector<double> nodes;
    if (lo > hi) return nodes;
    if (n == 1 || lo == hi) {
        nodes.push_back(lo == hi ? lo : 0.5 * (lo + hi));
        return nodes;
    }
    // An open lower end gets one extra node which is then skipped.
    const int count = open_lower ? n + 1 : n;
    for (int i = open_lower ? 1 : 0; i < count; ++i) {
        nodes.push_back(lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(count - 1)));
    }
    return nodes;
}

bool admissible(const Domain& dom, const Point& x, double w) { return dom.contains(x) && dom.norm_of(x) <= w; }

void append_grid(const Domain& dom, const SampleScheme& sc, double w, std::vector<Point>& out) {
    const int d = dom.dim();
    std::vector<std::vector<double>> nodes;
    for (int i = 0; i < d; ++i) {
        const bool open = dom.region() == Region::half_line && dom.open_lower();
        nodes.push_back(axis_nodes(dom.bounds()[static_cast<std::size_t>(i)], w, sc.grid_points_per_axis, open));
        if (nodes.back().empty()) return;
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    Point x(d);
    while (true) {
        for (int i = 0; i < d; ++i) x(i) = nodes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
        if (admissible(dom, x, w)) out.push_back(x);
        int k = 0;
        while (k < d) {
            auto& ik = idx[static_cast<std::size_t>(k)];
            if (++ik < nodes[static_cast<std::size_t>(k)].size()) break;
            ik = 0;
            ++k;
        }
        if (k == d) break;
    }
}

void append_quasirandom(const Domain& dom, const SampleScheme& sc, double w, int level, std::vector<Point>& out) {
    if (sc.quasirandom_count == 0) return;
    const int d = dom.dim();
    Rng rng(sc.seed + 0x51ed27ULL * static_cast<std::uint64_t>(level + 1));
    std::array<double, kMaxDim> shift{};
    for (int i = 0; i < d; ++i) shift[static_cast<std::size_t>(i)] = rng.uniform();
    Point x(d);
    int accepted = 0;
    const std::uint64_t max_tries = 16ULL * static_cast<std::uint64_t>(sc.quasirandom_count) + 64;
    for (std::uint64_t i = 1; i <= max_tries && accepted < sc.quasirandom_count; ++i) {
        for (int k = 0; k < d; ++k) {
            const Interval& b = dom.bounds()[static_cast<std::size_t>(k)];
            const double lo = std::max(b.lo, -w);
            const double hi = std::min(b.hi, w);
            double u = radical_inverse(i, kHaltonBases[static_cast<std::size_t>(k)]) + shift[static_cast<std::size_t>(k)];
            u -= std::floor(u);
            x(k) = lo + (hi - lo) * u;
        }
        if (admissible(dom, x, w)) {
            out.push_back(x);
            ++accepted;
        }
    }
}

void append_geometric(const Domain& dom, const SampleScheme& sc, double w, std::vector<Point>& out) {
    if (sc.geometric_points < 2) return;
    const int d = dom.dim();
    const double q = std::pow(1e-9, 1.0 / static_cast<double>(sc.geometric_points - 1));
    double radius = w;
    Point x(d);
    for (int i = 0; i < sc.geometric_points; ++i, radius *= q) {
        if (d == 1) {
            const double base = dom.region() == Region::half_line ? dom.bounds()[0].lo : 0.0;
            x(0) = base + radius;
            if (admissible(dom, x, w)) out.push_back(x);
            x(0) = base - radius;
            if (admissible(dom, x, w)) out.push_back(x);
            continue;
        }
        // Directions from a Halton sequence on the sphere's bounding cube.
        Point dir(d);
        for (int k = 0; k < d; ++k) {
            dir(k) = 2.0 * radical_inverse(static_cast<std::uint64_t>(i + 1), kHaltonBases[static_cast<std::size_t>(k)]) - 1.0;
        }
        const double n = norm(dir, dom.norm());
        if (n == 0.0) continue;
        x = dir * (radius / n);
        if (admissible(dom, x, w)) out.push_back(x);
    }
}

} // namespace

SampleSet::SampleSet(Domain domain, SampleScheme scheme) : domain_(std::move(domain)), scheme_(scheme) {
    scheme_.validate();
    for (int j = 0; j <= kWindowDoublings; ++j) {
        const double w = window_radius(j);
        std::vector<Point> cloud;
        append_grid(domain_, scheme_, w, cloud);
        append_quasirandom(domain_, scheme_, w, j, cloud);
        append_geometric(domain_, scheme_, w, cloud);
        if (j > 0) {
            // Keep only the new shell; the running max over levels sees the union.
            const double inner = window_radius(j - 1);
            std::erase_if(cloud, [&](const Point& x) { return domain_.norm_of(x) <= inner; });
        } else if (cloud.empty()) {
            throw std::invalid_argument("sample scheme produced no points inside the domain window");
        }
        levels_.push_back(std::move(cloud));
    }
}

double SampleSet::window_radius(int level) const { return scheme_.window_radius * std::ldexp(1.0, level); }

std::vector<Point> SampleSet::all() const {
    std::vector<Point> out;
    for (const auto& l : levels_) out.insert(out.end(), l.begin(), l.end());
    return out;
}

std::vector<Point> SampleSet::exhaustion(int k) const {
    if (k < 0 || k > scheme_.exhaustion_levels) throw std::out_of_range("exhaustion level out of range");
    const double radius = std::ldexp(1.0, k);
    std::vector<Point> out;
    for (const Point& x : base()) {
        if (domain_.norm_of(x) <= radius) out.push_back(x);
    }
    return out;
}

} // namespace homconj
