#include "morandim/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace morandim {

using nlohmann::json;

namespace {

constexpr double kSumTol = 1e-12;

std::string at_atom(const char* list, std::size_t i) {
    std::ostringstream os;
    os << list << "[" << i << "]: ";
    return os.str();
}

void check_scales(const IfsAtom& a, int k, const char* list, std::size_t i,
                  std::vector<std::string>& out) {
    if (static_cast<int>(a.scales.size()) != k) {
        out.push_back(at_atom(list, i) + "expected " + std::to_string(k) +
                      " scales, got " + std::to_string(a.scales.size()));
        return;
    }
    double sum = 0.0;
    for (double s : a.scales) {
        if (!(s > 0.0 && s < 1.0)) {
            out.push_back(at_atom(list, i) + "scale " + std::to_string(s) +
                          " outside (0,1)");
        }
        sum += s;
    }
    if (!(sum < 1.0)) {
        out.push_back(at_atom(list, i) + "scale sum " + std::to_string(sum) +
                      " >= 1");
    }
}

void check_weights(const std::vector<double>& w, int k, const char* list,
                   std::size_t i, std::vector<std::string>& out) {
    if (static_cast<int>(w.size()) != k) {
        out.push_back(at_atom(list, i) + "expected " + std::to_string(k) +
                      " weights, got " + std::to_string(w.size()));
        return;
    }
    double sum = 0.0;
    for (double p : w) {
        if (!(p > 0.0)) {
            out.push_back(at_atom(list, i) + "weight " + std::to_string(p) +
                          " not strictly positive");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTol) {
        out.push_back(at_atom(list, i) + "weights sum " + std::to_string(sum) +
                      " != 1");
    }
}

void check_offsets(const IfsAtom& a, int k, double tau, const char* list,
                   std::size_t i, std::vector<std::string>& out) {
    if (a.offsets.empty()) return;
    if (static_cast<int>(a.offsets.size()) != k) {
        out.push_back(at_atom(list, i) + "expected " + std::to_string(k) +
                      " offsets, got " + std::to_string(a.offsets.size()));
        return;
    }
    if (static_cast<int>(a.scales.size()) != k) return;  // already reported
    std::vector<std::pair<double, double>> iv(k);  // (left, right)
    for (int c = 0; c < k; ++c) {
        iv[c] = {a.offsets[c], a.offsets[c] + a.scales[c]};
        if (iv[c].first < -kSumTol || iv[c].second > 1.0 + kSumTol) {
            out.push_back(at_atom(list, i) + "child " + std::to_string(c + 1) +
                          " not inside [0,1]");
        }
    }
    std::sort(iv.begin(), iv.end());
    for (int c = 0; c + 1 < k; ++c) {
        double gap = iv[c + 1].first - iv[c].second;
        if (gap < tau - kSumTol) {
            out.push_back(at_atom(list, i) + "children gap " +
                          std::to_string(gap) + " below separation " +
                          std::to_string(tau));
        }
    }
}

void check_masses(const std::vector<double>& masses, const char* list,
                  std::vector<std::string>& out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0.0)) {
            out.push_back(at_atom(list, i) + "mass " +
                          std::to_string(masses[i]) + " not strictly positive");
        }
        sum += masses[i];
    }
    if (!masses.empty() && std::abs(sum - 1.0) > kSumTol) {
        out.push_back(std::string(list) + ": masses sum " + std::to_string(sum) +
                      " != 1");
    }
}

double max_scale_sum_of(const MoranModel& m) {
    double b = 0.0;
    auto upd = [&](const IfsAtom& a) {
        double s = std::accumulate(a.scales.begin(), a.scales.end(), 0.0);
        b = std::max(b, s);
    };
    for (const auto& a : m.atoms) upd(a.ifs);
    for (const auto& a : m.ifs_atoms) upd(a.ifs);
    return b;
}

// Idempotent: vectors already summing to 1 up to accumulated rounding are
// left untouched, so load(save(m)) reproduces m bit for bit.
void normalize_to_one(std::vector<double>& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(s - 1.0) <= 64 * std::numeric_limits<double>::epsilon()) return;
    for (double& x : v) x /= s;
}

MoranModel normalized(MoranModel m) {
    auto report = validate_model(m);
    if (!report.ok()) {
        std::string msg = "invalid model:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw ValidationError(msg);
    }
    if (m.mode == Mode::dependent) {
        std::vector<double> masses;
        for (const auto& a : m.atoms) masses.push_back(a.mass);
        normalize_to_one(masses);
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            m.atoms[i].mass = masses[i];
            if (!m.atoms[i].weights.empty()) normalize_to_one(m.atoms[i].weights);
        }
    } else {
        std::vector<double> qm, rm;
        for (const auto& a : m.ifs_atoms) qm.push_back(a.mass);
        normalize_to_one(qm);
        for (std::size_t i = 0; i < m.ifs_atoms.size(); ++i) m.ifs_atoms[i].mass = qm[i];
        if (!m.weight_atoms.empty()) {
            for (const auto& a : m.weight_atoms) rm.push_back(a.mass);
            normalize_to_one(rm);
            for (std::size_t i = 0; i < m.weight_atoms.size(); ++i) {
                m.weight_atoms[i].mass = rm[i];
                normalize_to_one(m.weight_atoms[i].weights.weights);
            }
        }
    }
    return m;
}

}  // namespace

ValidationReport validate_model(const MoranModel& m) {
    ValidationReport r;
    if (m.k < 2) {
        r.violations.push_back("k = " + std::to_string(m.k) + " < 2");
        return r;
    }
    const double b = max_scale_sum_of(m);
    const double tau = (1.0 - b) / m.k;

    if (m.mode == Mode::dependent) {
        if (m.atoms.empty()) r.violations.push_back("dependent model has no atoms");
        if (!m.ifs_atoms.empty() || !m.weight_atoms.empty())
            r.violations.push_back("dependent model carries independent-mode atom lists");
        std::vector<double> masses;
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            const auto& a = m.atoms[i];
            masses.push_back(a.mass);
            check_scales(a.ifs, m.k, "atoms", i, r.violations);
            check_offsets(a.ifs, m.k, tau, "atoms", i, r.violations);
            if (!a.weights.empty()) check_weights(a.weights, m.k, "atoms", i, r.violations);
        }
        check_masses(masses, "atoms", r.violations);
    } else {
        if (m.ifs_atoms.empty()) r.violations.push_back("independent model has no ifs_atoms");
        if (!m.atoms.empty())
            r.violations.push_back("independent model carries dependent-mode atoms");
        std::vector<double> qm, rm;
        for (std::size_t i = 0; i < m.ifs_atoms.size(); ++i) {
            const auto& a = m.ifs_atoms[i];
            qm.push_back(a.mass);
            check_scales(a.ifs, m.k, "ifs_atoms", i, r.violations);
            check_offsets(a.ifs, m.k, tau, "ifs_atoms", i, r.violations);
        }
        check_masses(qm, "ifs_atoms", r.violations);
        for (std::size_t i = 0; i < m.weight_atoms.size(); ++i) {
            const auto& a = m.weight_atoms[i];
            rm.push_back(a.mass);
            check_weights(a.weights.weights, m.k, "weight_atoms", i, r.violations);
        }
        if (!m.weight_atoms.empty()) check_masses(rm, "weight_atoms", r.violations);
    }
    return r;
}

MoranModel make_dependent_model(int k, std::vector<DependentAtom> atoms) {
    MoranModel m;
    m.k = k;
    m.mode = Mode::dependent;
    m.atoms = std::move(atoms);
    return normalized(std::move(m));
}

MoranModel make_independent_model(int k, std::vector<MassIfs> ifs_atoms,
                                  std::vector<MassWeights> weight_atoms) {
    MoranModel m;
    m.k = k;
    m.mode = Mode::independent;
    m.ifs_atoms = std::move(ifs_atoms);
    m.weight_atoms = std::move(weight_atoms);
    return normalized(std::move(m));
}

namespace {

std::vector<double> layout_offsets(const IfsAtom& a) {
    if (!a.offsets.empty()) return a.offsets;
    // flush to both ends, equal interior gaps
    const std::size_t k = a.scales.size();
    double sum = std::accumulate(a.scales.begin(), a.scales.end(), 0.0);
    double gap = (1.0 - sum) / static_cast<double>(k - 1);
    std::vector<double> off(k);
    double x = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        off[i] = x;
        x += a.scales[i] + gap;
    }
    return off;
}

ExpandedAtom expand_atom(double mass, const IfsAtom& ifs,
                         const std::vector<double>* weights) {
    ExpandedAtom e;
    e.mass = mass;
    e.scales = ifs.scales;
    e.offsets = layout_offsets(ifs);
    e.log_scales.reserve(e.scales.size());
    for (double s : e.scales) e.log_scales.push_back(std::log(s));
    if (weights) {
        e.weights = *weights;
        e.log_weights.reserve(e.weights.size());
        for (double p : e.weights) e.log_weights.push_back(std::log(p));
    }
    return e;
}

}  // namespace

ExpandedModel expand(const MoranModel& m) {
    auto report = validate_model(m);
    if (!report.ok()) {
        std::string msg = "cannot expand invalid model:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw ValidationError(msg);
    }
    ExpandedModel em;
    em.k = m.k;
    if (m.mode == Mode::dependent) {
        em.weighted = !m.atoms.empty();
        for (const auto& a : m.atoms) {
            em.weighted = em.weighted && !a.weights.empty();
        }
        for (const auto& a : m.atoms) {
            em.atoms.push_back(expand_atom(a.mass, a.ifs,
                                           a.weights.empty() ? nullptr : &a.weights));
        }
    } else {
        em.weighted = !m.weight_atoms.empty();
        if (em.weighted) {
            // product measure, scale atoms outer
            for (const auto& u : m.ifs_atoms) {
                for (const auto& v : m.weight_atoms) {
                    em.atoms.push_back(expand_atom(u.mass * v.mass, u.ifs,
                                                   &v.weights.weights));
                }
            }
        } else {
            for (const auto& u : m.ifs_atoms) {
                em.atoms.push_back(expand_atom(u.mass, u.ifs, nullptr));
            }
        }
    }

    em.min_scale = 1.0;
    em.max_scale = 0.0;
    em.max_scale_sum = 0.0;
    em.max_abs_log_weight = 0.0;
    for (const auto& a : em.atoms) {
        double sum = 0.0;
        for (double s : a.scales) {
            em.min_scale = std::min(em.min_scale, s);
            em.max_scale = std::max(em.max_scale, s);
            sum += s;
        }
        em.max_scale_sum = std::max(em.max_scale_sum, sum);
        for (double lp : a.log_weights) {
            em.max_abs_log_weight = std::max(em.max_abs_log_weight, std::abs(lp));
        }
    }
    em.tau = (1.0 - em.max_scale_sum) / em.k;
    return em;
}

IfsFamily ifs_family(const MoranModel& m) {
    IfsFamily fam;
    fam.k = m.k;
    if (m.mode == Mode::independent) {
        fam.atoms = m.ifs_atoms;
    } else {
        for (const auto& a : m.atoms) fam.atoms.push_back({a.mass, a.ifs});
    }
    return fam;
}

MoranModel with_single_weight(const IfsFamily& fam, std::vector<double> w) {
    MassWeights mw;
    mw.mass = 1.0;
    mw.weights.weights = std::move(w);
    return make_independent_model(fam.k, fam.atoms, {std::move(mw)});
}

MoranModel with_dependent_weights(const IfsFamily& fam,
                                  std::vector<std::vector<double>> per_atom) {
    if (per_atom.size() != fam.atoms.size()) {
        throw PreconditionError("need one weight vector per scale atom");
    }
    std::vector<DependentAtom> atoms;
    for (std::size_t i = 0; i < fam.atoms.size(); ++i) {
        atoms.push_back({fam.atoms[i].mass, fam.atoms[i].ifs, std::move(per_atom[i])});
    }
    return make_dependent_model(fam.k, std::move(atoms));
}

// --- JSON ---------------------------------------------------------------

namespace {

double get_real(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
    const json& v = j.at(key);
    if (!v.is_number()) throw SchemaError(where + ": \"" + key + "\" is not a number");
    return v.get<double>();
}

std::vector<double> get_reals(const json& j, const char* key,
                              const std::string& where) {
    if (!j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
    const json& v = j.at(key);
    if (!v.is_array()) throw SchemaError(where + ": \"" + key + "\" is not an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            throw SchemaError(where + ": \"" + key + "\" holds a non-number");
        out.push_back(x.get<double>());
    }
    return out;
}

IfsAtom parse_ifs_part(const json& j, const std::string& where) {
    IfsAtom a;
    a.scales = get_reals(j, "scales", where);
    if (j.contains("offsets")) a.offsets = get_reals(j, "offsets", where);
    return a;
}

MoranModel parse_k2_document(const json& j) {
    const std::string where = "k2 document";
    double base = get_real(j, "base", where);
    auto alphas = get_reals(j, "alphas", where);
    auto betas = get_reals(j, "betas", where);
    auto masses = get_reals(j, "masses", where);
    if (!(base > 0.0 && base < 1.0))
        throw SchemaError(where + ": base must lie in (0,1)");
    if (alphas.size() != betas.size() || alphas.size() != masses.size())
        throw SchemaError(where + ": alphas/betas/masses length mismatch");
    if (alphas.empty()) throw SchemaError(where + ": empty exponent lists");
    std::vector<MassIfs> ifs;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        MassIfs mi;
        mi.mass = masses[i];
        mi.ifs.scales = {std::pow(base, alphas[i]), std::pow(base, betas[i])};
        ifs.push_back(std::move(mi));
    }
    return make_independent_model(2, std::move(ifs), {});
}

json ifs_to_json(const IfsAtom& a) {
    json j;
    j["scales"] = a.scales;
    if (!a.offsets.empty()) j["offsets"] = a.offsets;
    return j;
}

}  // namespace

MoranModel load_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("model document is not a JSON object");

    if (j.contains("base") && j.contains("alphas")) return parse_k2_document(j);

    if (!j.contains("k")) throw SchemaError("missing \"k\"");
    if (!j.at("k").is_number_integer()) throw SchemaError("\"k\" is not an integer");
    int k = j.at("k").get<int>();
    if (!j.contains("mode") || !j.at("mode").is_string())
        throw SchemaError("missing or non-string \"mode\"");
    std::string mode = j.at("mode").get<std::string>();

    if (mode == "dependent") {
        if (!j.contains("atoms") || !j.at("atoms").is_array())
            throw SchemaError("dependent model needs an \"atoms\" array");
        std::vector<DependentAtom> atoms;
        std::size_t i = 0;
        for (const auto& aj : j.at("atoms")) {
            std::string where = "atoms[" + std::to_string(i++) + "]";
            DependentAtom a;
            a.mass = get_real(aj, "mass", where);
            a.ifs = parse_ifs_part(aj, where);
            if (aj.contains("weights")) a.weights = get_reals(aj, "weights", where);
            atoms.push_back(std::move(a));
        }
        return make_dependent_model(k, std::move(atoms));
    }
    if (mode == "independent") {
        if (!j.contains("ifs_atoms") || !j.at("ifs_atoms").is_array())
            throw SchemaError("independent model needs an \"ifs_atoms\" array");
        std::vector<MassIfs> ifs;
        std::size_t i = 0;
        for (const auto& aj : j.at("ifs_atoms")) {
            std::string where = "ifs_atoms[" + std::to_string(i++) + "]";
            MassIfs a;
            a.mass = get_real(aj, "mass", where);
            a.ifs = parse_ifs_part(aj, where);
            ifs.push_back(std::move(a));
        }
        std::vector<MassWeights> wts;
        if (j.contains("weight_atoms")) {
            if (!j.at("weight_atoms").is_array())
                throw SchemaError("\"weight_atoms\" is not an array");
            i = 0;
            for (const auto& aj : j.at("weight_atoms")) {
                std::string where = "weight_atoms[" + std::to_string(i++) + "]";
                MassWeights a;
                a.mass = get_real(aj, "mass", where);
                a.weights.weights = get_reals(aj, "weights", where);
                wts.push_back(std::move(a));
            }
        }
        return make_independent_model(k, std::move(ifs), std::move(wts));
    }
    throw SchemaError("unknown mode \"" + mode + "\"");
}

std::string save_model(const MoranModel& m) {
    json j;
    j["k"] = m.k;
    if (m.mode == Mode::dependent) {
        j["mode"] = "dependent";
        json atoms = json::array();
        for (const auto& a : m.atoms) {
            json aj = ifs_to_json(a.ifs);
            aj["mass"] = a.mass;
            if (!a.weights.empty()) aj["weights"] = a.weights;
            atoms.push_back(std::move(aj));
        }
        j["atoms"] = std::move(atoms);
    } else {
        j["mode"] = "independent";
        json ifs = json::array();
        for (const auto& a : m.ifs_atoms) {
            json aj = ifs_to_json(a.ifs);
            aj["mass"] = a.mass;
            ifs.push_back(std::move(aj));
        }
        j["ifs_atoms"] = std::move(ifs);
        json wts = json::array();
        for (const auto& a : m.weight_atoms) {
            wts.push_back({{"mass", a.mass}, {"weights", a.weights.weights}});
        }
        j["weight_atoms"] = std::move(wts);
    }
    return j.dump(2) + "\n";
}

std::string model_digest(const MoranModel& m) {
    const std::string doc = save_model(m);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : doc) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace morandim
