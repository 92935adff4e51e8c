#include "morandim/sim.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace morandim::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (stream + 1));
    std::uint64_t mixed = splitmix64(s);
    return std::mt19937_64(mixed);
}

double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::vector<double> mass_cdf(const ExpandedModel& em) {
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& a : em.atoms) {
        acc += a.mass;
        cdf.push_back(acc);
    }
    cdf.back() = 1.0;
    return cdf;
}

std::uint32_t draw_index(const std::vector<double>& cdf, double u) {
    for (std::uint32_t i = 0; i < cdf.size(); ++i) {
        if (u < cdf[i]) return i;
    }
    return static_cast<std::uint32_t>(cdf.size() - 1);
}

constexpr std::size_t kCheckpoints[] = {100, 1000, 10000, 100000};

}  // namespace

LambdaSequence sample_sequence(const ExpandedModel& em, std::size_t n,
                               std::uint64_t seed) {
    if (n < 1) throw PreconditionError("sequence length must be >= 1");
    LambdaSequence seq;
    seq.seed = seed;
    seq.draws.reserve(n);
    auto cdf = mass_cdf(em);
    auto eng = make_engine(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        seq.draws.push_back(draw_index(cdf, uniform01(eng)));
    }
    return seq;
}

namespace {

PathStats run_path(const ExpandedModel& em, const LambdaSequence& seq,
                   const std::vector<int>& choice, std::string rule) {
    PathStats st;
    st.rule = std::move(rule);
    std::size_t next_cp = 0;
    std::size_t step = 0;
    for (std::uint32_t a : seq.draws) {
        const auto& atom = em.atoms[a];
        int c = choice[a];
        st.sum_log_weight += atom.log_weights[c];
        st.sum_log_scale += atom.log_scales[c];
        ++step;
        if (next_cp < std::size(kCheckpoints) && step == kCheckpoints[next_cp]) {
            st.trace.emplace_back(step, st.sum_log_weight / st.sum_log_scale);
            ++next_cp;
        }
    }
    st.final_ratio = st.sum_log_weight / st.sum_log_scale;
    return st;
}

}  // namespace

PathStats path_ratio(const ExpandedModel& em, const LambdaSequence& seq,
                     const Selector& chi) {
    if (!em.weighted) throw PreconditionError("path statistics need weights");
    if (chi.choice.size() != em.size()) {
        throw PreconditionError("selector does not cover every atom");
    }
    return run_path(em, seq, chi.choice, "selector");
}

EmpiricalSummary empirical_dimensions(const MoranModel& m, std::size_t n,
                                      int trials, std::uint64_t seed,
                                      const DimOptions& opt) {
    if (n < 1000) throw PreconditionError("need at least 1000 steps per trial");
    if (trials < 1) throw PreconditionError("need at least one trial");
    const ExpandedModel em = expand(m);
    EmpiricalSummary s;
    s.updim = upper_dimension(em, opt);
    s.lowdim = lower_dimension(em, opt);
    s.steps = n;
    s.trials = trials;
    s.seed = seed;
    const Selector up = upper_ratio(em, s.updim).chosen;
    const Selector dn = lower_ratio(em, s.lowdim).chosen;

    auto cdf = mass_cdf(em);
    for (int t = 0; t < trials; ++t) {
        auto eng = make_engine(seed, static_cast<std::uint64_t>(t));
        double up_lw = 0.0, up_ls = 0.0, dn_lw = 0.0, dn_ls = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t a = draw_index(cdf, uniform01(eng));
            const auto& atom = em.atoms[a];
            up_lw += atom.log_weights[up.choice[a]];
            up_ls += atom.log_scales[up.choice[a]];
            dn_lw += atom.log_weights[dn.choice[a]];
            dn_ls += atom.log_scales[dn.choice[a]];
        }
        s.max_path_ratios.push_back(up_lw / up_ls);
        s.min_path_ratios.push_back(dn_lw / dn_ls);
    }
    return s;
}

void moran_intervals(const ExpandedModel& em, const LambdaSequence& seq,
                     int depth, const std::string& prefix,
                     const std::function<void(const MoranInterval&)>& emit) {
    if (!em.weighted) throw PreconditionError("interval measures need weights");
    if (em.k > 9) {
        throw PreconditionError("interval addresses use single-digit child labels (K <= 9)");
    }
    if (depth < 1) throw PreconditionError("depth must be >= 1");
    if (static_cast<std::size_t>(depth) > seq.draws.size()) {
        throw PreconditionError("sequence shorter than the requested depth");
    }
    if (prefix.empty() && depth > 40) {
        throw PreconditionError("depth > 40 needs an address prefix filter");
    }
    std::vector<int> fixed;
    for (char c : prefix) {
        int child = c - '1';
        if (child < 0 || child >= em.k) {
            throw PreconditionError("address prefix has a child label outside 1.." +
                                    std::to_string(em.k));
        }
        fixed.push_back(child);
    }
    if (static_cast<int>(fixed.size()) > depth) {
        throw PreconditionError("address prefix longer than the depth");
    }
    double free_count = std::pow(static_cast<double>(em.k),
                                 static_cast<double>(depth - fixed.size()));
    if (free_count > static_cast<double>(std::uint64_t{1} << 26)) {
        throw PreconditionError("interval count exceeds 2^26; narrow the prefix");
    }

    MoranInterval iv;
    iv.address.reserve(depth);
    std::function<void(int, double, double, double)> walk =
        [&](int level, double left, double length, double measure) {
            if (level == depth) {
                iv.left = left;
                iv.length = length;
                iv.measure = measure;
                emit(iv);
                return;
            }
            const auto& atom = em.atoms[seq.draws[level]];
            if (level < static_cast<int>(fixed.size())) {
                int c = fixed[level];
                iv.address.push_back(static_cast<char>('1' + c));
                walk(level + 1, left + atom.offsets[c] * length,
                     length * atom.scales[c], measure * atom.weights[c]);
                iv.address.pop_back();
                return;
            }
            for (int c = 0; c < em.k; ++c) {
                iv.address.push_back(static_cast<char>('1' + c));
                walk(level + 1, left + atom.offsets[c] * length,
                     length * atom.scales[c], measure * atom.weights[c]);
                iv.address.pop_back();
            }
        };
    walk(0, 0.0, 1.0, 1.0);
}

void write_intervals_csv(const ExpandedModel& em, const LambdaSequence& seq,
                         int depth, const std::string& prefix,
                         std::ostream& os) {
    os << "address,left,length,measure\n";
    char buf[96];
    moran_intervals(em, seq, depth, prefix, [&](const MoranInterval& iv) {
        std::snprintf(buf, sizeof(buf), ",%.12g,%.12g,%.12g\n", iv.left,
                      iv.length, iv.measure);
        os << iv.address << buf;
    });
}

}  // namespace morandim::sim
