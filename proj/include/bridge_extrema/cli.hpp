#pragma once

// Batch command-line surface: single-point evaluation, tabulation,
// goodness-of-fit runs on data files, and the two verification suites.
// All results go to the output stream as JSON (objects with sorted keys)
// or CSV; diagnostics go to the error stream.  Exit codes: 0 OK, 1 failed
// verification or evaluation, 2 usage error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bridge_extrema/accuracy.hpp"
#include "bridge_extrema/distributions.hpp"
#include "bridge_extrema/gof.hpp"
#include "bridge_extrema/laplace.hpp"
#include "bridge_extrema/mc.hpp"

namespace bridge_extrema::cli {

namespace detail {

using json = nlohmann::json;

// shortest round-trip representation, shared by JSON and CSV output so
// `table` cells equal `eval` values bit for bit after parsing
inline std::string num(double x) { return json(x).dump(); }

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// closed forms for `eval`/`table`; trunc_bound stays 0 where the form is
// not a truncated series
inline double eval_dist(const std::string& dist, const std::vector<double>& at,
                        const Accuracy& acc, double& trunc_bound) {
    trunc_bound = 0.0;
    if (dist == "ks") return ks_cdf(at[0], acc, &trunc_bound);
    if (dist == "kuiper") return kuiper_cdf(at[0], acc, &trunc_bound);
    if (dist == "min") return min_extremum_tail(at[0], acc, &trunc_bound);
    if (dist == "diff") return diff_tail(at[0], acc, &trunc_bound);
    if (dist == "quotient") return quotient_cdf(at[0]);
    if (dist == "onesided") return one_sided_tail(at[0]);
    return joint_cdf(at[0], at[1], acc, &trunc_bound);
}

inline std::function<double(double)> make_null_cdf(const std::string& spec, std::string& error) {
    const auto head = split(spec, ':');
    const std::string& name = head[0];
    if (name == "uniform") {
        if (head.size() != 1) {
            error = "uniform null takes no parameters";
            return {};
        }
        return [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    }
    if (name == "normal") {
        if (head.size() != 2) {
            error = "normal null needs mu,sigma";
            return {};
        }
        const auto params = split(head[1], ',');
        if (params.size() != 2) {
            error = "normal null needs mu,sigma";
            return {};
        }
        const auto mu = parse_double(params[0]), sigma = parse_double(params[1]);
        if (!mu || !sigma || !(*sigma > 0.0)) {
            error = "bad normal parameters";
            return {};
        }
        return [m = *mu, s = *sigma](double x) {
            return 0.5 * std::erfc(-(x - m) / (s * std::sqrt(2.0)));
        };
    }
    if (name == "exp") {
        if (head.size() != 2) {
            error = "exp null needs a rate";
            return {};
        }
        const auto rate = parse_double(head[1]);
        if (!rate || !(*rate > 0.0)) {
            error = "bad exp rate";
            return {};
        }
        return [r = *rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-r * x); };
    }
    if (name == "gamma-half") {
        if (head.size() != 2) {
            error = "gamma-half null needs theta";
            return {};
        }
        const auto theta = parse_double(head[1]);
        if (!theta || !(*theta > 0.0)) {
            error = "bad gamma-half theta";
            return {};
        }
        // Gamma(1/2, theta) in closed form
        return [t = *theta](double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(t * x)); };
    }
    error = "unknown null '" + name + "'";
    return {};
}

inline const char* test_name(GofTest t) {
    switch (t) {
        case GofTest::ks: return "ks";
        case GofTest::ks_plus: return "ks-plus";
        case GofTest::kuiper: return "kuiper";
    }
    return "?";
}

inline json report_json(const GofReport& r) {
    return json{{"p_value", r.p_value},
                {"small_sample_warning", r.small_sample_warning},
                {"stat_raw", r.stat_raw},
                {"stat_scaled", r.stat_scaled},
                {"test", test_name(r.test)}};
}

struct VerifyRow {
    std::string check;
    double closed_form, mc_mean, std_err;
    bool pass;
};

inline json rows_json(const std::vector<VerifyRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"check", r.check},
                           {"closed_form", r.closed_form},
                           {"mc_mean", r.mc_mean},
                           {"pass", r.pass},
                           {"stderr", r.std_err}});
    return arr;
}

// indicator functionals against their closed forms; 0.01 discretization
// allowance on the positive-threshold extrema laws, none on the exactly
// symmetric or moment checks
inline void extrema_rows(long paths, int steps, uint64_t seed, std::vector<VerifyRow>& rows) {
    struct Check {
        const char* label;
        Functional f;
        double closed;
        double allowance;
    };
    const Accuracy acc;
    const Check checks[] = {
        {"onesided_tail(1)", Functional::onesided_tail(1.0), one_sided_tail(1.0), 0.01},
        {"max_cdf(1)", Functional::max_cdf(1.0), ks_cdf(1.0, acc), 0.01},
        {"min_tail(0.5)", Functional::min_tail(0.5), min_extremum_tail(0.5, acc), 0.01},
        {"joint_cdf(0.5,0.5)", Functional::joint_cdf(0.5, 0.5), joint_cdf(0.5, 0.5, acc), 0.01},
        {"kuiper_cdf(1)", Functional::kuiper_cdf(1.0), kuiper_cdf(1.0, acc), 0.01},
        {"diff_tail(0.5)", Functional::diff_tail(0.5), diff_tail(0.5, acc), 0.01},
        {"diff_tail(0)", Functional::diff_tail(0.0), 0.5, 0.0},
        {"quotient_cdf(2)", Functional::quotient_cdf(2.0), quotient_cdf(2.0), 0.01},
        {"product_moment", Functional::product_moment(), extrema_moments().e_product, 0.0},
    };
    for (const auto& c : checks) {
        const McEstimate e = estimate(c.f, paths, steps, seed);
        const bool pass = std::abs(e.mean - c.closed) <= 3.0 * e.std_err + c.allowance;
        rows.push_back({c.label, c.closed, e.mean, e.std_err, pass});
    }
}

// distribution-fit rows: mc_mean carries the fit p-value, closed_form the
// significance floor it must clear, stderr is not meaningful for a p-value
inline void fit_row(const char* label, const std::vector<double>& data,
                    const std::function<double(double)>& null_cdf,
                    std::vector<VerifyRow>& rows) {
    const GofReport r = ks_test(Sample(data), null_cdf);
    rows.push_back({label, 0.001, r.p_value, 0.0, r.p_value > 0.001});
}

inline void excursion_rows(long paths, int steps, uint64_t seed, std::vector<VerifyRow>& rows) {
    const long n = paths;
    std::vector<double> data(n);
    // widely spaced per-fit seed bases; otherwise the theta-scaled killed
    // walks would reuse the same draws and produce lockstep statistics
    uint64_t fit = 0;
    auto fit_seed = [&]() { return seed + (fit++ << 32); };

    const uint64_t s_arc = fit_seed();
    for (long i = 0; i < n; ++i)
        data[i] = last_zero_unit_bm(steps, s_arc + static_cast<uint64_t>(i));
    fit_row("fit:last_zero_arcsine", data,
            [](double x) {
                const double c = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
                return (2.0 / std::numbers::pi) * std::asin(std::sqrt(c));
            },
            rows);

    for (const double theta : {0.5, 2.0}) {
        const ThetaParam tp(theta);
        const uint64_t s_g = fit_seed();
        for (long i = 0; i < n; ++i)
            data[i] = killed_bm_g(tp, steps, s_g + static_cast<uint64_t>(i)).g;
        const std::string label = theta == 0.5 ? "fit:killed_g(theta=0.5)" : "fit:killed_g(theta=2)";
        fit_row(label.c_str(), data,
                [theta](double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(theta * x)); },
                rows);
    }

    // max(vervaat(p)) equals the bridge range pathwise (grid identity), and
    // the refined pair sum samples the continuum range law exactly, so the
    // Vervaat-max fit draws it that way instead of scanning biased grid maxima
    const Accuracy acc{1e-10, 2000};
    std::vector<double> scratch;
    const uint64_t s_verv = fit_seed();
    for (long i = 0; i < n; ++i) {
        const auto [mp, mm] = sample_extrema_pair(steps, s_verv, static_cast<uint64_t>(i),
                                                  ExtremaMode::refined, scratch);
        data[i] = mp + mm;
    }
    fit_row("fit:vervaat_max_kuiper", data,
            [&acc](double x) { return x <= 0.0 ? 0.0 : kuiper_cdf(x, acc); }, rows);

    const ThetaParam tp(0.5);
    const uint64_t s_pair = fit_seed();
    std::vector<double> sum(n), mx(n), margin(n);
    for (long i = 0; i < n; ++i) {
        const KilledBmExtrema e = killed_bm_extrema(tp, steps, s_pair + static_cast<uint64_t>(i));
        sum[i] = e.m_plus + e.m_minus;
        mx[i] = std::max(e.m_plus, e.m_minus);
        margin[i] = e.m_plus;
    }
    fit_row("fit:killed_pair_sum(theta=0.5)", sum,
            [&tp](double x) {
                return x <= 0.0 ? 0.0 : rescaled_law(RescaledKind::sum_cdf, x, std::nullopt, tp);
            },
            rows);
    fit_row("fit:killed_pair_max(theta=0.5)", mx,
            [&tp](double x) {
                return x <= 0.0 ? 0.0 : rescaled_law(RescaledKind::max_cdf, x, std::nullopt, tp);
            },
            rows);
    fit_row("fit:killed_pair_margin(theta=0.5)", margin,
            [&tp](double x) {
                return x <= 0.0 ? 0.0
                                : 1.0 - rescaled_law(RescaledKind::onesided_tail, x, std::nullopt, tp);
            },
            rows);
}

struct GridSpec {
    double from, to, step;
};

inline std::optional<GridSpec> parse_grid(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) return std::nullopt;
    const auto a = parse_double(parts[0]), b = parse_double(parts[1]), h = parse_double(parts[2]);
    if (!a || !b || !h || !(*h > 0.0) || !(*a <= *b)) return std::nullopt;
    return GridSpec{*a, *b, *h};
}

}  // namespace detail

// Parses and runs one command; everything the process would print goes to
// the two streams, and the return value is the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using detail::json;

    CLI::App app{"Exact and simulated laws of Brownian bridge extrema"};
    app.require_subcommand(1);

    auto* eval = app.add_subcommand("eval", "evaluate one distribution at a point");
    std::string ev_dist, ev_at;
    double ev_tol = 1e-12;
    eval->add_option("--dist", ev_dist, "ks|kuiper|min|diff|quotient|joint|onesided")
        ->required()
        ->check(CLI::IsMember({"ks", "kuiper", "min", "diff", "quotient", "joint", "onesided"}));
    eval->add_option("--at", ev_at, "x or x,y (joint)")->required();
    eval->add_option("--tol", ev_tol, "series tolerance");

    auto* table = app.add_subcommand("table", "tabulate one distribution as CSV");
    std::string tb_dist, tb_out;
    double tb_from = 0.0, tb_to = 0.0, tb_step = 0.0;
    table->add_option("--dist", tb_dist, "ks|kuiper|min|diff|quotient|onesided")
        ->required()
        ->check(CLI::IsMember({"ks", "kuiper", "min", "diff", "quotient", "onesided"}));
    table->add_option("--from", tb_from)->required();
    table->add_option("--to", tb_to)->required();
    table->add_option("--step", tb_step)->required();
    table->add_option("--out", tb_out, "write CSV here instead of stdout");

    auto* test = app.add_subcommand("test", "goodness-of-fit test on a data file");
    std::string ts_file, ts_test, ts_null;
    test->add_option("--file", ts_file, "one numeric value per line, optional header")->required();
    test->add_option("--test", ts_test)->required()->check(CLI::IsMember({"ks", "ks-plus", "kuiper"}));
    test->add_option("--null", ts_null, "uniform|normal:mu,sigma|exp:rate|gamma-half:theta")
        ->required();

    auto* mcv = app.add_subcommand("mc-verify", "Monte Carlo vs closed forms");
    long mc_paths = 200000;
    int mc_steps = 2048;
    uint64_t mc_seed = 1;
    // excursion fits need much finer meshes than the extrema suite
    // (last-zero detection bias scales like sqrt(mesh)), so they only run
    // when asked for
    std::string mc_suite = "extrema";
    mcv->add_option("--paths", mc_paths)->check(CLI::PositiveNumber);
    mcv->add_option("--steps", mc_steps)->check(CLI::PositiveNumber);
    mcv->add_option("--seed", mc_seed);
    mcv->add_option("--suite", mc_suite)->check(CLI::IsMember({"extrema", "excursion", "all"}));

    auto* lpv = app.add_subcommand("laplace-verify", "gamma-mixture route agreement");
    double lp_theta = 0.0;
    std::string lp_grid = "0.2:3:0.2";
    lpv->add_option("--theta", lp_theta)->required();
    lpv->add_option("--grid", lp_grid, "from:to:step");

    args.insert(args.begin(), "bridge-extrema");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (*eval) {
            std::vector<double> at;
            for (const auto& tok : detail::split(ev_at, ',')) {
                const auto v = detail::parse_double(tok);
                if (!v) {
                    err << "eval: bad --at value '" << tok << "'\n";
                    return 2;
                }
                at.push_back(*v);
            }
            const std::size_t want = ev_dist == "joint" ? 2 : 1;
            if (at.size() != want) {
                err << "eval: --dist " << ev_dist << " needs " << want << " value(s)\n";
                return 2;
            }
            if (!(ev_tol > 0.0)) {
                err << "eval: --tol must be > 0\n";
                return 2;
            }
            double bound = 0.0;
            double value;
            try {
                value = detail::eval_dist(ev_dist, at, Accuracy{ev_tol, 200}, bound);
            } catch (const std::domain_error& e) {
                err << "eval: " << e.what() << "\n";
                return 2;
            }
            out << json{{"args", at}, {"dist", ev_dist}, {"trunc_bound", bound}, {"value", value}}
                       .dump()
                << "\n";
            return 0;
        }

        if (*table) {
            if (!(tb_step > 0.0) || tb_from > tb_to) {
                err << "table: need --step > 0 and --from <= --to\n";
                return 2;
            }
            std::ostringstream csv;
            csv << "x,value\n";
            const long count = static_cast<long>((tb_to - tb_from) / tb_step + 1e-9);
            for (long k = 0; k <= count; ++k) {
                const double x = tb_from + static_cast<double>(k) * tb_step;
                double bound = 0.0;
                double value;
                try {
                    value = detail::eval_dist(tb_dist, {x}, Accuracy{}, bound);
                } catch (const std::domain_error& e) {
                    err << "table: at x=" << x << ": " << e.what() << "\n";
                    return 2;
                }
                csv << detail::num(x) << "," << detail::num(value) << "\n";
            }
            if (tb_out.empty()) {
                out << csv.str();
            } else {
                std::ofstream f(tb_out);
                if (!f) {
                    err << "table: cannot open '" << tb_out << "'\n";
                    return 2;
                }
                f << csv.str();
            }
            return 0;
        }

        if (*test) {
            std::ifstream f(ts_file);
            if (!f) {
                err << "test: cannot open '" << ts_file << "'\n";
                return 2;
            }
            std::vector<double> values;
            std::string line;
            bool first = true;
            while (std::getline(f, line)) {
                if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                    line.erase(0, 3);
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
                if (line.empty()) {
                    first = false;
                    continue;
                }
                const auto v = detail::parse_double(line);
                if (!v) {
                    if (first) {   // optional header
                        first = false;
                        continue;
                    }
                    err << "test: non-numeric line '" << line << "'\n";
                    return 2;
                }
                first = false;
                values.push_back(*v);
            }
            std::string null_err;
            const auto null_cdf = detail::make_null_cdf(ts_null, null_err);
            if (!null_cdf) {
                err << "test: " << null_err << "\n";
                return 2;
            }
            if (values.empty()) {
                err << "test: no data in '" << ts_file << "'\n";
                return 2;
            }
            const Sample sample(std::move(values));
            GofReport r;
            if (ts_test == "ks")
                r = ks_test(sample, null_cdf);
            else if (ts_test == "ks-plus")
                r = ks_plus_test(sample, null_cdf);
            else
                r = kuiper_test(sample, null_cdf);
            if (r.small_sample_warning)
                err << "test: n = " << sample.n() << " is below the asymptotic comfort zone\n";
            out << detail::report_json(r).dump() << "\n";
            return 0;
        }

        if (*mcv) {
            std::vector<detail::VerifyRow> rows;
            if (mc_suite != "excursion") detail::extrema_rows(mc_paths, mc_steps, mc_seed, rows);
            if (mc_suite != "extrema") detail::excursion_rows(mc_paths, mc_steps, mc_seed, rows);
            out << detail::rows_json(rows).dump() << "\n";
            for (const auto& r : rows)
                if (!r.pass) return 1;
            return 0;
        }

        // laplace-verify
        const auto grid = detail::parse_grid(lp_grid);
        if (!grid) {
            err << "laplace-verify: bad --grid, expected from:to:step\n";
            return 2;
        }
        if (!(lp_theta > 0.0)) {
            err << "laplace-verify: --theta must be > 0\n";
            return 2;
        }
        const ThetaParam tp(lp_theta);
        const QuadratureSpec q;
        const Accuracy acc{1e-12, 2000};
        const double rho = 1.5;   // ray for the two-argument joint law
        struct KindCheck {
            const char* kind;
            std::function<double(double)> unscaled;
            std::function<double(double)> rescaled;
        };
        const KindCheck kinds[] = {
            {"onesided_tail", [&](double u) { return one_sided_tail(u); },
             [&](double x) { return rescaled_law(RescaledKind::onesided_tail, x, std::nullopt, tp); }},
            {"max_cdf", [&](double u) { return ks_cdf(u, acc); },
             [&](double x) { return rescaled_law(RescaledKind::max_cdf, x, std::nullopt, tp); }},
            {"min_tail", [&](double u) { return min_extremum_tail(u, acc); },
             [&](double x) { return rescaled_law(RescaledKind::min_tail, x, std::nullopt, tp); }},
            {"joint_cdf", [&](double u) { return joint_cdf(u, rho * u, acc); },
             [&](double x) { return rescaled_law(RescaledKind::joint_cdf, x, rho * x, tp); }},
            {"sum_cdf", [&](double u) { return kuiper_cdf(u, acc); },
             [&](double x) { return rescaled_law(RescaledKind::sum_cdf, x, std::nullopt, tp); }},
            {"diff_tail", [&](double u) { return diff_tail(u, acc); },
             [&](double x) { return rescaled_diff_tail(x, tp, q); }},
        };
        json arr = json::array();
        bool all_pass = true;
        const long n_pts = static_cast<long>((grid->to - grid->from) / grid->step + 1e-9);
        for (const auto& k : kinds) {
            for (long i = 0; i <= n_pts; ++i) {
                const double x = grid->from + static_cast<double>(i) * grid->step;
                const double res = gamma_mix_check(k.unscaled, k.rescaled, x, tp, q);
                const bool pass = std::abs(res) < 1e-6;
                all_pass = all_pass && pass;
                arr.push_back(
                    json{{"kind", k.kind}, {"pass", pass}, {"residual", res}, {"x", x}});
            }
        }
        out << arr.dump() << "\n";
        return all_pass ? 0 : 1;
    } catch (const accuracy_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args), out, err);
}

}  // namespace bridge_extrema::cli
