#include "morandim/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace morandim {

namespace {

constexpr double kTieRel = 1e-14;

void require_weighted(const ExpandedModel& em) {
    if (!em.weighted) {
        throw PreconditionError("operation needs a model with probability weights");
    }
}

// score of child i: theta * log a(i) - log p(i)  (= log of scale^theta/weight)
inline double score(double theta, const ExpandedAtom& a, int i) {
    return theta * a.log_scales[i] - a.log_weights[i];
}

}  // namespace

int max_ratio_child(double theta, const ExpandedAtom& atom) {
    const int k = static_cast<int>(atom.scales.size());
    double best = score(theta, atom, 0);
    for (int i = 1; i < k; ++i) best = std::max(best, score(theta, atom, i));
    const double slack = kTieRel * std::max(1.0, std::abs(best));
    for (int i = 0; i < k; ++i) {
        if (score(theta, atom, i) >= best - slack) return i;
    }
    return 0;  // unreachable
}

int min_ratio_child(double theta, const ExpandedAtom& atom) {
    const int k = static_cast<int>(atom.scales.size());
    double best = score(theta, atom, 0);
    for (int i = 1; i < k; ++i) best = std::min(best, score(theta, atom, i));
    const double slack = kTieRel * std::max(1.0, std::abs(best));
    for (int i = 0; i < k; ++i) {
        if (score(theta, atom, i) <= best + slack) return i;
    }
    return 0;  // unreachable
}

namespace {

template <typename Pick>
RatioValue ratio_along(const ExpandedModel& em, double theta, Pick pick) {
    require_weighted(em);
    RatioValue r;
    r.theta = theta;
    r.chosen.choice.resize(em.size());
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < em.size(); ++a) {
        const auto& atom = em.atoms[a];
        int i = pick(theta, atom);
        r.chosen.choice[a] = i;
        num += atom.mass * atom.log_weights[i];
        den += atom.mass * atom.log_scales[i];
    }
    r.log_weight_mean = num;
    r.log_scale_mean = den;
    r.value = num / den;
    return r;
}

}  // namespace

RatioValue upper_ratio(const ExpandedModel& em, double theta) {
    if (!(theta >= 0.0)) throw PreconditionError("theta must be >= 0");
    return ratio_along(em, theta, &max_ratio_child);
}

RatioValue lower_ratio(const ExpandedModel& em, double theta) {
    if (!(theta >= 0.0)) throw PreconditionError("theta must be >= 0");
    return ratio_along(em, theta, &min_ratio_child);
}

double selector_ratio(const ExpandedModel& em, const Selector& chi) {
    require_weighted(em);
    if (chi.choice.size() != em.size()) {
        throw PreconditionError("selector does not cover every atom");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < em.size(); ++a) {
        int i = chi.choice[a];
        if (i < 0 || i >= em.k) throw PreconditionError("selector child index out of range");
        num += em.atoms[a].mass * em.atoms[a].log_weights[i];
        den += em.atoms[a].mass * em.atoms[a].log_scales[i];
    }
    return num / den;
}

std::uint64_t selector_count(const ExpandedModel& em, std::uint64_t cap) {
    double approx = std::pow(static_cast<double>(em.k),
                             static_cast<double>(em.size()));
    std::uint64_t count = 1;
    for (std::size_t a = 0; a < em.size(); ++a) {
        if (count > cap / em.k + 1) {
            throw EnumerationCapError(
                "selector space has " + std::to_string(approx) +
                    " elements, above the cap of " + std::to_string(cap) +
                    "; use the bisection method",
                approx);
        }
        count *= static_cast<std::uint64_t>(em.k);
    }
    if (count > cap) {
        throw EnumerationCapError(
            "selector space has " + std::to_string(approx) +
                " elements, above the cap of " + std::to_string(cap) +
                "; use the bisection method",
            approx);
    }
    return count;
}

void enumerate_selectors(const ExpandedModel& em,
                         const std::function<void(const Selector&)>& visit,
                         std::uint64_t cap) {
    selector_count(em, cap);
    Selector chi;
    chi.choice.assign(em.size(), 0);
    const std::size_t n = em.size();
    while (true) {
        visit(chi);
        // odometer increment, last atom fastest
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++chi.choice[pos] < em.k) break;
            chi.choice[pos] = 0;
            if (pos == 0) return;
        }
        if (n == 0) return;
    }
}

namespace {

struct Extremes {
    double max_value = -std::numeric_limits<double>::infinity();
    double min_value = std::numeric_limits<double>::infinity();
    std::vector<int> argmax, argmin;

    void offer(double v, const std::vector<int>& chi) {
        if (v > max_value || (v == max_value && chi < argmax)) {
            max_value = v;
            argmax = chi;
        }
        if (v < min_value || (v == min_value && chi < argmin)) {
            min_value = v;
            argmin = chi;
        }
    }
    void merge(const Extremes& o) {
        if (o.argmax.empty()) return;
        if (o.max_value > max_value || (o.max_value == max_value && o.argmax < argmax)) {
            max_value = o.max_value;
            argmax = o.argmax;
        }
        if (o.min_value < min_value || (o.min_value == min_value && o.argmin < argmin)) {
            min_value = o.min_value;
            argmin = o.argmin;
        }
    }
};

// Depth-first walk with running sums; each leaf ratio folds the atoms in
// order, so values are bit-identical however the tree is partitioned.
void scan(const ExpandedModel& em, std::size_t depth, double num, double den,
          std::vector<int>& chi, Extremes& ext) {
    if (depth == em.size()) {
        ext.offer(num / den, chi);
        return;
    }
    const auto& atom = em.atoms[depth];
    for (int i = 0; i < em.k; ++i) {
        chi[depth] = i;
        scan(em, depth + 1, num + atom.mass * atom.log_weights[i],
             den + atom.mass * atom.log_scales[i], chi, ext);
    }
    chi[depth] = 0;
}

}  // namespace

SelectorExtremes selector_extremes(const ExpandedModel& em, std::uint64_t cap,
                                   int threads) {
    require_weighted(em);
    selector_count(em, cap);
    const std::size_t n = em.size();

    // prefix depth so that K^depth subtrees can be spread across threads
    std::size_t prefix = 0;
    if (threads > 1) {
        std::uint64_t subtrees = 1;
        while (prefix < n && subtrees < static_cast<std::uint64_t>(threads) * 4) {
            subtrees *= em.k;
            ++prefix;
        }
    }

    // enumerate prefixes with their partial sums
    struct Prefix {
        std::vector<int> path;
        double num, den;
    };
    std::vector<Prefix> prefixes;
    {
        std::vector<int> path(prefix, 0);
        std::function<void(std::size_t, double, double)> rec =
            [&](std::size_t d, double num, double den) {
                if (d == prefix) {
                    prefixes.push_back({path, num, den});
                    return;
                }
                const auto& atom = em.atoms[d];
                for (int i = 0; i < em.k; ++i) {
                    path[d] = i;
                    rec(d + 1, num + atom.mass * atom.log_weights[i],
                        den + atom.mass * atom.log_scales[i]);
                }
                path[d] = 0;
            };
        rec(0, 0.0, 0.0);
    }

    const int nworkers = std::max(1, std::min<int>(threads, prefixes.size()));
    std::vector<Extremes> partial(nworkers);
    auto worker = [&](int w) {
        std::vector<int> chi(n, 0);
        for (std::size_t pi = w; pi < prefixes.size(); pi += nworkers) {
            const auto& pf = prefixes[pi];
            std::copy(pf.path.begin(), pf.path.end(), chi.begin());
            scan(em, prefix, pf.num, pf.den, chi, partial[w]);
        }
    };
    if (nworkers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }

    Extremes total;
    for (const auto& p : partial) total.merge(p);
    SelectorExtremes out;
    out.max_value = total.max_value;
    out.min_value = total.min_value;
    out.argmax.choice = std::move(total.argmax);
    out.argmin.choice = std::move(total.argmin);
    return out;
}

}  // namespace morandim
