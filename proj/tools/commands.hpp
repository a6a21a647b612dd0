#pragma once

// Command implementations behind the hu_stab executable. Each command returns
// a JSON report and an exit status; the executable only handles argument
// parsing and output routing, so tests can drive commands directly.

#include "hustab/instances.hpp"
#include "hustab/matrix_io.hpp"
#include "hustab/perturb.hpp"
#include "hustab/stability.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hustab::cli
{

using json = nlohmann::ordered_json;

inline constexpr const char* schema = "hu-stab/1";

enum ExitCode : int
{
    exit_ok = 0,
    exit_property_failed = 1,
    exit_error = 2,
    exit_gate_failed = 3,
};

struct RunConfig
{
    Tolerances tol;
    std::uint64_t seed = 0;
    std::optional<MatrixFormat> format;  ///< unset: decided per file by extension
    Index samples = 1000;
};

struct CommandResult
{
    json report;
    int exit_code = exit_ok;
};

// ---- JSON helpers -----------------------------------------------------------

/// Non-finite reals are spelled out; JSON has no literal for them.
inline json number(double v)
{
    if (std::isnan(v))
        return "undefined";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

inline json matrix_json(const Mat& a)
{
    json re = json::array();
    json im = json::array();
    const bool is_complex = (a.imag().array() != 0.0).any();
    for (Index i = 0; i < a.rows(); ++i) {
        json re_row = json::array();
        json im_row = json::array();
        for (Index j = 0; j < a.cols(); ++j) {
            re_row.push_back(a(i, j).real());
            im_row.push_back(a(i, j).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    json out{{"rows", a.rows()}, {"cols", a.cols()}, {"re", std::move(re)}};
    if (is_complex)
        out["im"] = std::move(im);
    return out;
}

template <std::size_t N>
json residuals_json(const std::array<double, N>& r)
{
    json out = json::array();
    for (double v : r)
        out.push_back(number(v));
    return out;
}

inline std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::ParseError, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xf];
    }
    return out;
}

inline MatrixFormat format_for(const std::string& path, const RunConfig& cfg)
{
    if (cfg.format)
        return *cfg.format;
    const auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with(".mtx") || ends_with(".mm") ? MatrixFormat::MatrixMarketDense : MatrixFormat::Csv;
}

inline std::string_view format_name(MatrixFormat f)
{
    return f == MatrixFormat::Csv ? "csv" : "mm";
}

/// Loaded operand plus its provenance record for the report.
struct Input
{
    Mat matrix;
    json record;
};

inline Input load_input(const std::string& role, const std::string& path, const RunConfig& cfg)
{
    const std::string bytes = read_file_bytes(path);
    const MatrixFormat f = format_for(path, cfg);
    Input in{parse_matrix(bytes, f), {}};
    in.record = {{"role", role},
                 {"path", path},
                 {"format", format_name(f)},
                 {"sha256", sha256_hex(bytes)},
                 {"rows", in.matrix.rows()},
                 {"cols", in.matrix.cols()}};
    return in;
}

inline json base_report(std::string_view command, const RunConfig& cfg, const std::vector<Input>& inputs = {})
{
    json inputs_json = json::array();
    for (const Input& in : inputs)
        inputs_json.push_back(in.record);
    return {{"schema", schema},
            {"tool_version", HUSTAB_VERSION},
            {"command", command},
            {"seed", cfg.seed},
            {"tolerances", {{"rank_rel", cfg.tol.rank_rel}, {"eq_abs", cfg.tol.eq_abs}, {"cond_max", cfg.tol.cond_max}}},
            {"inputs", std::move(inputs_json)}};
}

inline json error_json(const Error& e)
{
    return {{"kind", to_string(e.kind())}, {"message", e.what()}};
}

inline GenInverse choose_geninv(const Mat& t, bool oblique, const RunConfig& cfg)
{
    if (!oblique)
        return geninv_orthogonal(t, cfg.tol);
    Rng rng = Rng(cfg.seed).split(0x67656e);
    return random_bounded_geninv(t, rng, cfg.tol);
}

// ---- commands ---------------------------------------------------------------

inline CommandResult cmd_pinv(const std::string& path, PinvMethod method, bool oblique, const RunConfig& cfg)
{
    const Input in = load_input("t", path, cfg);
    CommandResult out{base_report("pinv", cfg, {in})};
    const Mat oracle = pinv_svd(in.matrix, cfg.tol);
    const MoorePenrose mp = method == PinvMethod::SvdOracle
                                ? pinv_oracle(in.matrix, cfg.tol)
                                : pinv(choose_geninv(in.matrix, oblique, cfg), method, cfg.tol);
    out.report["method"] = to_string(method);
    out.report["complements"] = oblique ? "oblique" : "orthogonal";
    out.report["rank"] = rank_tol(in.matrix, cfg.tol);
    out.report["t_dagger"] = matrix_json(mp.t_dagger);
    out.report["penrose_residuals"] = residuals_json(mp.residuals);
    out.report["penrose_ok"] = mp.satisfies_penrose(cfg.tol);
    out.report["oracle_delta"] = number(distance(mp.t_dagger, oracle));
    return out;
}

inline CommandResult cmd_stability(const std::string& path, const RunConfig& cfg)
{
    const Input in = load_input("t", path, cfg);
    CommandResult out{base_report("stability", cfg, {in})};
    const StabilityReport rep = stability_constant(in.matrix, cfg.tol, cfg.samples, cfg.seed);
    out.report["rank"] = rep.rank;
    out.report["gamma"] = number(rep.gamma);
    out.report["k_t"] = number(rep.k_t);
    out.report["product"] = number(rep.product());
    out.report["witness"] = {{"samples", rep.witness_samples},
                             {"max_ratio", number(rep.max_witness_ratio)},
                             {"x0_in_null_space", rep.witnesses_in_null_space}};
    return out;
}

inline CommandResult cmd_witness(const std::string& t_path, const std::string& x_path, const RunConfig& cfg)
{
    const Input t = load_input("t", t_path, cfg);
    const Input x = load_input("x", x_path, cfg);
    require(x.matrix.rows() == 1 || x.matrix.cols() == 1, ErrorKind::ShapeMismatch, "x must be a single row or column");
    const Vec xv = x.matrix.cols() == 1 ? Vec(x.matrix.col(0)) : Vec(x.matrix.row(0).transpose());
    CommandResult out{base_report("witness", cfg, {t, x})};
    const Mat t_dagger = pinv_svd(t.matrix, cfg.tol);
    const Witness w = stability_witness_with(t.matrix, t_dagger, xv);
    out.report["x0"] = matrix_json(w.x0);
    out.report["ratio"] = number(w.ratio);
    out.report["k_t"] = number(spectral_norm(t_dagger));
    out.report["tx0_norm"] = number((t.matrix * w.x0).norm());
    out.report["x0_in_null_space"] = contains(null_space(t.matrix, cfg.tol), w.x0, cfg.tol);
    return out;
}

inline CommandResult cmd_geninv(const std::string& path, bool oblique, const RunConfig& cfg)
{
    const Input in = load_input("t", path, cfg);
    CommandResult out{base_report("geninv", cfg, {in})};
    const GenInverse g = choose_geninv(in.matrix, oblique, cfg);
    out.report["complements"] = oblique ? "oblique" : "orthogonal";
    out.report["t_plus"] = matrix_json(g.t_plus);
    out.report["axiom_residuals"] = residuals_json(g.axiom_residuals);
    out.report["axioms_ok"] = check_axioms(g.t, g.t_plus, cfg.tol).ok;
    out.report["p_norm"] = number(g.p.obliqueness());
    out.report["q_norm"] = number(g.q.obliqueness());
    return out;
}

struct PerturbOptions
{
    bool oblique = false;
    std::optional<TBound> bound;  ///< user constants, checked on sampled vectors
};

inline CommandResult cmd_perturb(const std::string& t_path, const std::string& dt_path, const PerturbOptions& opts,
                                 const RunConfig& cfg)
{
    const Input t = load_input("t", t_path, cfg);
    const Input dt = load_input("delta_t", dt_path, cfg);
    CommandResult out{base_report("perturb", cfg, {t, dt})};
    const GenInverse g = choose_geninv(t.matrix, opts.oblique, cfg);
    const TBound bound = opts.bound.value_or(TBound{spectral_norm(dt.matrix), 0.0});
    out.report["complements"] = opts.oblique ? "oblique" : "orthogonal";
    out.report["bound"] = {{"a", bound.a}, {"b", bound.b}, {"sampled_only", opts.bound.has_value()}};
    out.report["gate"] = {{"value", number(gate_value(g, bound))}};

    std::optional<Perturbation> p;
    try {
        p = opts.bound ? make_perturbation(t.matrix, dt.matrix, g, *opts.bound, cfg.seed, cfg.tol, cfg.samples)
                       : make_perturbation(t.matrix, dt.matrix, g, cfg.tol);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GateFailed && e.kind() != ErrorKind::BoundViolated)
            throw;
        out.report["gate"]["passed"] = false;
        out.report["gate"]["error"] = error_json(e);
        out.exit_code = exit_gate_failed;
        return out;
    }
    out.report["gate"]["passed"] = true;

    const PerturbReport rep = analyze_perturbation(*p, cfg.tol);
    json conditions = json::object();
    for (Condition c : all_conditions)
        conditions[std::string(to_string(c))] = rep.conditions[c];
    out.report["conditions"] = std::move(conditions);
    out.report["equivalence_held"] = rep.conditions.equivalence_held;
    out.report["rank_criteria_held"] = rep.conditions.rank_criteria_held;
    out.report["b_axiom_residuals"] = residuals_json(rep.conditions.b_axioms.residuals);
    out.report["k_t"] = number(rep.k_t);
    out.report["k_t_bar"] = number(rep.k_t_bar);
    out.report["pinv_delta"] = number(rep.pinv_delta);
    out.report["lipschitz"] = {{"bound", number(rep.lipschitz.bound)},
                               {"difference", number(rep.lipschitz.difference)},
                               {"holds", rep.lipschitz.holds}};
    out.report["corollary"] = std::string(to_string(rep.corollary.classification()));
    if (rep.t_bar_dagger) {
        out.report["t_bar_dagger"] = matrix_json(*rep.t_bar_dagger);
        out.report["oracle_delta"] = number(rep.oracle_delta);
    } else {
        out.report["note"] = "perturbed pseudoinverse not produced by formula";
    }
    return out;
}

inline std::vector<double> default_scales()
{
    std::vector<double> s;
    for (int k = 1; k <= 10; ++k)
        s.push_back(std::ldexp(1.0, -k));
    return s;
}

inline CommandResult cmd_sweep(const std::string& t_path, const std::string& dir_path, std::vector<double> scales,
                               bool parallel, const RunConfig& cfg)
{
    const Input t = load_input("t", t_path, cfg);
    const Input dir = load_input("direction", dir_path, cfg);
    if (scales.empty())
        scales = default_scales();
    CommandResult out{base_report("sweep", cfg, {t, dir})};
    const GenInverse g = geninv_orthogonal(t.matrix, cfg.tol);
    SweepTable table;
    try {
        table = continuity_sweep(t.matrix, dir.matrix, scales, g, cfg.tol, parallel);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GateFailed)
            throw;
        out.report["gate"] = {{"passed", false}, {"error", error_json(e)}};
        out.exit_code = exit_gate_failed;
        return out;
    }
    out.report["gate"] = {{"passed", true}};
    out.report["k_t"] = number(table.k_t);
    json rows = json::array();
    for (const SweepRow& r : table.rows)
        rows.push_back({{"scale", r.scale},
                        {"rank_equal", r.rank_equal},
                        {"formula_used", r.formula_used},
                        {"k_t_bar", number(r.k_t_bar)},
                        {"k_delta", number(r.k_delta)},
                        {"k_t_bar_times_scale", number(r.k_t_bar_times_scale)},
                        {"pinv_delta", number(r.pinv_delta)},
                        {"lipschitz_bound", number(r.lipschitz_bound)},
                        {"lipschitz_holds", r.lipschitz_holds}});
    out.report["rows"] = std::move(rows);
    out.report["verdict"] = std::string(to_string(table.verdict));
    out.report["max_k_delta_ratio"] = number(table.max_k_delta_ratio);
    return out;
}

// ---- selftest ---------------------------------------------------------------

/// Outcome of one randomized property: pass count and the worst residual seen.
struct PropertyTally
{
    Index total = 0;
    Index passed = 0;
    double max_residual = 0.0;

    void record(bool ok, double residual)
    {
        ++total;
        passed += ok ? 1 : 0;
        if (std::isnan(residual) || residual > max_residual)
            max_residual = residual;
    }
};

namespace selftest_detail
{

inline Mat deficient_operator(Rng& rng)
{
    const Index m = 2 + rng.index(8);
    const Index n = 2 + rng.index(8);
    return random_matrix_with_rank(m, n, 1 + rng.index(std::min(m, n) - 1), rng);
}

inline Mat injected(Mat m)
{
#ifdef HUSTAB_INJECT_FAULT
    m(0, 0) += 1e-3;
#endif
    return m;
}

}  // namespace selftest_detail

inline CommandResult cmd_selftest(const RunConfig& cfg, Index instances = 40)
{
    using namespace selftest_detail;
    const Tolerances& tol = cfg.tol;
    const Rng root(cfg.seed);
    std::vector<std::pair<std::string, std::function<PropertyTally(Rng&)>>> properties;

    properties.emplace_back("stability_identity", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            const Mat t = random_operator(rng, random_shape(rng, static_cast<RankProfile>(k % 3)));
            const StabilityReport rep = stability_constant(t, tol);
            if (rep.rank == 0)
                tally.record(rep.gamma == infinity && rep.k_t == 0.0, 0.0);
            else
                tally.record(std::abs(rep.product() - 1.0) <= 1e-8, std::abs(rep.product() - 1.0));
        }
        return tally;
    });

    properties.emplace_back("pinv_agreement", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            const Mat t = random_operator(rng, random_shape(rng, k % 4 ? RankProfile::Deficient : RankProfile::Full));
            const GenInverse g = random_bounded_geninv(t, rng, tol);
            const Mat oracle = pinv_svd(t, tol);
            const Mat f21 = pinv_from_geninv_21(g, tol).t_dagger;
            const Mat f23 = injected(pinv_from_geninv_23(g, tol).t_dagger);
            const double r = std::max({distance(f21, oracle), distance(f23, oracle), distance(f21, f23)}) /
                             (1.0 + spectral_norm(oracle));
            tally.record(r <= 1e-8, r);
        }
        return tally;
    });

    properties.emplace_back("orthogonalization", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            const Index n = 2 + rng.index(9);
            const Index dim = 1 + rng.index(n - 1);
            const Subspace onto = Subspace::span(random_gaussian(n, dim, rng), tol);
            const Subspace along = random_complement(onto, rng.next_u64(), tol);
            const Projector p = oblique_projector(onto, along, tol);
            const OrthogonalizationForms forms = orthogonalization_forms(p.matrix, tol);
            const Mat reference = orthogonal_projector(onto).matrix;
            const double r = std::max({distance(orthogonalize(p, tol).matrix, reference),
                                       distance(forms.right, reference), distance(forms.left, reference),
                                       forms.commutation_residual});
            tally.record(r <= 1e-8, r);
        }
        return tally;
    });

    properties.emplace_back("geninv_axioms", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            const Mat t = deficient_operator(rng);
            const GenInverse g = random_bounded_geninv(t, rng, tol);
            const double r = *std::max_element(g.axiom_residuals.begin(), g.axiom_residuals.end());
            const bool spaces = subspace_equal(range_space(g.t_plus, tol), g.p.along, tol) &&
                                subspace_equal(null_space(g.t_plus, tol), g.q.along, tol);
            tally.record(r <= 1e-8 && spaces, r);
        }
        return tally;
    });

    // Shared generator for the perturbation properties: cycles through the
    // three perturbation kinds with a random gate below 0.6.
    const auto perturbation = [&](Rng& rng, Index k) {
        const Mat t = deficient_operator(rng);
        const GenInverse g = random_bounded_geninv(t, rng, tol);
        const auto kind = static_cast<PerturbationKind>(k % 3);
        return std::pair{make_perturbation(t, random_perturbation(g, kind, rng.uniform(0.05, 0.6), rng, tol), g, tol),
                         kind};
    };

    properties.emplace_back("condition_equivalence", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            const auto [p, kind] = perturbation(rng, k);
            const ConditionReport rep = check_conditions(p, tol);
            const bool expected = rep[Condition::C4_trivial_intersection] == (kind != PerturbationKind::RankJumping);
            tally.record(rep.equivalence_held && rep.rank_criteria_held && expected, 0.0);
        }
        return tally;
    });

    properties.emplace_back("perturbed_formula", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            auto [p, kind] = perturbation(rng, k % 2);  // rank-preserving kinds only
            (void)kind;
            const Mat closed = perturbed_pinv(p, tol);
            const Mat b = build_b(p, tol);
            const double r = distance(closed, pinv_svd(p.t_bar, tol));
            const double rb = spectral_norm(b * p.t_bar * b - b);
            tally.record(r <= 1e-7 && rb <= 1e-8, std::max(r, rb));
        }
        return tally;
    });

    properties.emplace_back("lipschitz_bound", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            auto [p, kind] = perturbation(rng, k);
            (void)kind;
            const LipschitzCheck lip = analyze_perturbation(p, tol).lipschitz;
            tally.record(lip.holds, std::max(0.0, lip.difference - lip.bound));
        }
        return tally;
    });

    properties.emplace_back("corollary_formulas", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances; ++k) {
            auto [p, kind] = perturbation(rng, k % 2);
            const CorollaryReport cor = corollary_special_cases(p, tol);
            const Mat oracle = pinv_svd(p.t_bar, tol);
            const std::optional<Mat>& formula =
                kind == PerturbationKind::NullPreserving ? cor.null_formula : cor.range_formula;
            if (!formula) {
                tally.record(false, infinity);
                continue;
            }
            const double r = distance(*formula, oracle);
            tally.record(r <= 1e-7 && cor.kernel_unchanged && cor.range_unchanged, r);
        }
        return tally;
    });

    properties.emplace_back("witness_attainment", [&](Rng& rng) {
        PropertyTally tally;
        for (Index k = 0; k < instances / 4 + 1; ++k) {
            const Mat t = random_operator(rng, random_shape(rng, k % 2 ? RankProfile::Full : RankProfile::Deficient));
            const StabilityReport rep = stability_constant(t, tol, 1000, rng.next_u64());
            const double deficit = rep.k_t > 0.0 ? 1.0 - rep.max_witness_ratio / rep.k_t : 0.0;
            const bool ok = rep.witnesses_in_null_space && rep.max_witness_ratio <= rep.k_t + 1e-8 && deficit <= 1e-3;
            tally.record(ok, std::abs(deficit));
        }
        return tally;
    });

    CommandResult out{base_report("selftest", cfg)};
    out.report["instances_per_property"] = instances;
    json props = json::object();
    bool all_passed = true;
    for (std::size_t i = 0; i < properties.size(); ++i) {
        Rng rng = root.split(i + 1);
        PropertyTally tally;
        std::optional<Error> failure;
        try {
            tally = properties[i].second(rng);
        } catch (const Error& e) {
            failure = e;
        }
        const bool ok = !failure && tally.passed == tally.total;
        all_passed = all_passed && ok;
        json entry{{"passed", tally.passed}, {"total", tally.total}, {"max_residual", number(tally.max_residual)},
                   {"ok", ok}};
        if (failure)
            entry["error"] = error_json(*failure);
        props[properties[i].first] = std::move(entry);
    }
    out.report["properties"] = std::move(props);
    out.report["all_passed"] = all_passed;
    out.exit_code = all_passed ? exit_ok : exit_property_failed;
    return out;
}

// ---- text rendering ---------------------------------------------------------

/// Flat "key: value" lines for terminal use; matrices are printed row by row.
inline void render_text(const json& j, std::string& out, const std::string& prefix = "")
{
    if (j.is_object() && j.contains("rows") && j.contains("re")) {
        out += prefix + ":\n";
        const auto& re = j["re"];
        for (std::size_t i = 0; i < re.size(); ++i) {
            out += "  ";
            for (std::size_t c = 0; c < re[i].size(); ++c) {
                const double im = j.contains("im") ? j["im"][i][c].get<double>() : 0.0;
                out += (c ? "  " : "") + format_complex({re[i][c].get<double>(), im});
            }
            out += '\n';
        }
        return;
    }
    if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            render_text(value, out, prefix.empty() ? key : prefix + "." + key);
        return;
    }
    if (j.is_array() && !j.empty() && j.front().is_object()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            render_text(j[i], out, prefix + "[" + std::to_string(i) + "]");
        return;
    }
    out += prefix + ": " + (j.is_string() ? j.get<std::string>() : j.dump()) + '\n';
}

}  // namespace hustab::cli
