#pragma once

#include "airy.hpp"
#include "fredholm.hpp"
#include "kernels.hpp"
#include "mop.hpp"
#include "painleve.hpp"
#include "quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace ncpiv::cli {

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string family = "a";
    double nu = 1.0;
    int n = 3;
    double s_min = -3.0;
    double s_max = 3.0;
    int s_steps = 61;
    int quad_points = 200;
    double radius = 1.0;
    double line_re = 2.0;
    double line_trunc = std::sqrt(2.0 * 2.0 + 40.0);
    double step = 1e-3;
    std::uint64_t seed = 0;
    std::string out = "-";
    std::string format = "csv";
    std::string init;                    // painleve initial data (JSON); empty = seeded random
    std::vector<int> n_list{8, 16, 32, 64};  // airy
};

inline void validate(const RunConfig& c) {
    if (c.family != "a" && c.family != "b" && c.family != "scalar") throw usage_error("family must be a, b or scalar");
    if (c.format != "csv" && c.format != "json") throw usage_error("format must be csv or json");
    if (!std::isfinite(c.nu)) throw usage_error("nu must be finite");
    if (c.n < 0) throw usage_error("n must be >= 0");
    if (!(c.s_min < c.s_max)) throw usage_error("s_min must be below s_max");
    if (c.s_steps < 2) throw usage_error("s_steps must be >= 2");
    if (c.quad_points < 20) throw usage_error("quad_points must be >= 20");
    if (!(c.step > 0.0)) throw usage_error("step must be positive");
    if (!(c.line_trunc > 0.0)) throw usage_error("line_trunc must be positive");
    try {
        check_contour_ordering(c.radius, c.line_re);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
}

inline WeightFamily family_of(const RunConfig& c) {
    if (c.family == "a") return WeightFamily::example_a(c.nu);
    if (c.family == "b") return WeightFamily::example_b(c.nu);
    return WeightFamily::scalar();
}

inline ContourSettings contours_of(const RunConfig& c, ContourSettings base = {}) {
    base.radius = c.radius;
    base.line_re = c.line_re;
    base.line_trunc = c.line_trunc;
    return base;
}

inline std::vector<double> s_grid(const RunConfig& c) { return uniform_grid(c.s_min, c.s_max, c.s_steps); }

// ---- tables ----

using Cell = std::variant<std::monostate, double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_cell(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
    if (std::holds_alternative<long>(c)) return std::to_string(std::get<long>(c));
    if (std::holds_alternative<std::string>(c)) {
        const std::string& s = std::get<std::string>(c);
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    return "";
}

inline nlohmann::json json_cell(const Cell& c) {
    if (std::holds_alternative<double>(c)) {
        const double v = std::get<double>(c);
        if (std::isfinite(v)) return v;
        return format_number(v);
    }
    if (std::holds_alternative<long>(c)) return std::get<long>(c);
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return nullptr;
}

inline void write_table(const Table& t, const std::string& format, std::ostream& os) {
    if (format == "json") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : t.rows) {
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            for (std::size_t k = 0; k < t.columns.size(); ++k) o[t.columns[k]] = json_cell(r[k]);
            rows.push_back(std::move(o));
        }
        nlohmann::ordered_json doc = {{"columns", t.columns}, {"rows", rows}};
        os << doc.dump(2) << "\n";
        return;
    }
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << csv_cell(r[k]);
        os << "\n";
    }
}

// ---- threading ----

inline unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NCPIV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return unsigned(std::min<long>(v, 256));
    }
    return hw;
}

// each index is written by exactly one worker; callers keep results per index
template <typename F>
void parallel_for(std::size_t count, F&& fn) {
    const unsigned t = std::min<std::size_t>(thread_count(), std::max<std::size_t>(count, 1));
    if (t <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex m;
    std::size_t next = 0;
    std::exception_ptr first;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lk(m);
                if (next >= count || first) return;
                i = next++;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

// ---- verify ----

struct CheckResult {
    std::string name;
    double max_residual = NAN;
    double tolerance = NAN;
    std::string status;  // pass, fail, n/a
};

inline CheckResult judged(std::string name, double r, double tol) {
    return {std::move(name), r, tol, (r <= tol) ? "pass" : "fail"};
}

inline std::vector<CheckResult> verify_checks(const RunConfig& c) {
    const WeightFamily w = family_of(c);
    const int n = c.n;
    const MOPFamily f = build_family(w, n + 1, gauss_hermite(c.quad_points));
    const ContourSettings cs = contours_of(c);
    std::vector<CheckResult> out;

    out.push_back(judged("orthonormality", f.orthonormality_residual, 1e-9));

    double norm_err = 0.0;
    for (int k = 0; k <= n; ++k) {
        const RMat ref = closed_form_norm(w, k);
        norm_err = std::max(norm_err, max_abs<double>(RMat(f.norms[k] - ref)) / max_abs<double>(ref));
    }
    out.push_back(judged("norm_formula", norm_err, 1e-8));

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    std::vector<double> xs(20);
    for (double& x : xs) x = ux(rng);
    double ode = 0.0;
    for (int k = 0; k <= n; ++k)
        for (double x : xs) ode = std::max(ode, max_abs<double>(ode_residual(f, k, x)));
    out.push_back(judged("ode_residual", ode, 1e-8));

    if (n >= 1) {
        const KernelPayload p = family_payload(w, n);
        const std::vector<double> grid = uniform_grid(-2.0, 2.0, 5);
        double dev = 0.0, scale = 0.0;
        for (double x : grid)
            for (double y : grid) {
                const RMat ks = cd_sum(f, n, x, y);
                const CMat kd = cd_double_integral(p, n, x, y, cs);
                dev = std::max(dev, max_abs<cplx>(CMat(kd - to_complex(ks))));
                scale = std::max(scale, max_abs<double>(ks));
            }
        out.push_back(judged("kernel_equivalence", dev / scale, 1e-6));
    } else {
        out.push_back({"kernel_equivalence", NAN, 1e-6, "n/a"});
    }

    if (w.is_matrix()) {
        double loop = 0.0, line = 0.0;
        for (int k = 0; k <= n; ++k)
            for (double x : {-1.0, 0.0, 0.5, 1.5}) {
                const CMat direct = to_complex(intrep_direct(f, k, x));
                loop = std::max(loop, max_abs<cplx>(CMat(intrep_loop(w, k, x, cs) - direct)));
                line = std::max(line, max_abs<cplx>(CMat(intrep_line(w, k, x, cs) - direct)));
            }
        out.push_back(judged("intrep_loop", loop, 1e-8));
        out.push_back(judged("intrep_line", line, 1e-8));
    } else {
        out.push_back({"intrep_loop", NAN, 1e-8, "n/a"});
        out.push_back({"intrep_line", NAN, 1e-8, "n/a"});
    }
    return out;
}

inline int run_verify(const RunConfig& c, std::ostream& os) {
    validate(c);
    const auto checks = verify_checks(c);
    Table t{{"check", "max_residual", "tolerance", "status"}, {}};
    bool ok = true;
    for (const auto& r : checks) {
        t.rows.push_back({r.name, r.status == "n/a" ? Cell{} : Cell{r.max_residual}, r.tolerance, r.status});
        ok = ok && r.status != "fail";
    }
    write_table(t, c.format, os);
    return ok ? 0 : 1;
}

// ---- fredholm scan ----

inline Table fredholm_scan(const RunConfig& c) {
    validate(c);
    if (c.n < 1) throw usage_error("fredholm-scan needs n >= 1");
    const WeightFamily w = family_of(c);
    const MOPFamily f = build_family(w, c.n, gauss_hermite(c.quad_points));
    const ContourSettings cs = contours_of(c, nystrom_settings());
    const std::vector<double> grid = s_grid(c);
    Table t{{"s", "det_gram", "det_contour", "R", "Rp", "Rpp", "sigma_piv_residual", "error"}, {}};
    t.rows.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double s = grid[i];
        std::vector<Cell> row(8);
        row[0] = s;
        std::string err;
        auto note = [&](const char* what, const std::exception& e) {
            if (!err.empty()) err += "; ";
            err += std::string(what) + ": " + e.what();
        };
        try {
            row[1] = gram_det(f, c.n, s);
        } catch (const std::exception& e) {
            note("det_gram", e);
        }
        try {
            row[2] = contour_det(w, c.n, s, cs).value;
        } catch (const std::exception& e) {
            note("det_contour", e);
        }
        try {
            if (w.kind == FamilyKind::Scalar) {
                const SigmaPiv sp = sigma_piv(f, c.n, s);
                row[3] = sp.r;
                row[4] = sp.rp;
                row[5] = sp.rpp;
                row[6] = sp.residual;
            } else {
                const double h = 1e-4;
                const TruncatedSpan mid = truncated_span(f, c.n, s);
                if (!(mid.logdet > std::log(1e-300))) throw numerical_error("determinant vanishes");
                row[3] = mid.r;
                row[4] = mid.rp;
                row[5] = (truncated_span(f, c.n, s + h).rp - truncated_span(f, c.n, s - h).rp) / (2.0 * h);
            }
        } catch (const std::exception& e) {
            note("log_deriv", e);
        }
        row[7] = err;
        t.rows[i] = std::move(row);
    });
    return t;
}

inline int run_fredholm_scan(const RunConfig& c, std::ostream& os) {
    write_table(fredholm_scan(c), c.format, os);
    return 0;
}

// ---- painleve ----

inline RMat json_matrix(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty()) throw usage_error(std::string("initial data lacks ") + key);
    const auto& a = j[key];
    const std::size_t r = a.size(), cols = a[0].is_array() ? a[0].size() : 0;
    if (cols == 0) throw usage_error(std::string(key) + " must be a nested array");
    RMat m(r, cols);
    for (std::size_t i = 0; i < r; ++i) {
        if (!a[i].is_array() || a[i].size() != cols) throw usage_error(std::string(key) + " is ragged");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!a[i][k].is_number()) throw usage_error(std::string(key) + " has a non-numeric entry");
            m(i, k) = a[i][k].get<double>();
        }
    }
    return m;
}

inline PIVState parse_initial_data(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw usage_error(std::string("initial data is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("initial data must be a JSON object");
    PIVState st;
    const std::string v = j.value("variant", std::string("a"));
    if (v != "a" && v != "b") throw usage_error("variant must be a or b");
    st.variant = v == "a" ? Variant::A : Variant::B;
    if (!j.contains("n") || !j["n"].is_number_integer()) throw usage_error("initial data needs an integer n");
    st.n = j["n"].get<int>();
    st.y = json_matrix(j, "y");
    st.z = json_matrix(j, "z");
    st.zp = json_matrix(j, "zp");
    st.u = json_matrix(j, "u");
    try {
        validate_state(st);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    return st;
}

inline PIVState painleve_start(const RunConfig& c) {
    PIVState st;
    if (!c.init.empty()) {
        std::ifstream in(c.init);
        if (!in) throw usage_error("cannot read initial data file " + c.init);
        std::stringstream ss;
        ss << in.rdbuf();
        st = parse_initial_data(ss.str());
    } else {
        if (c.family == "scalar") throw usage_error("painleve needs family a or b");
        st = random_state(c.seed, c.family == "a" ? Variant::A : Variant::B, c.n);
    }
    st.s = c.s_min;
    return st;
}

inline Table painleve_table(const RunConfig& c) {
    validate(c);
    PIVState st = painleve_start(c);
    const std::vector<double> grid = s_grid(c);
    Table t{{"s", "u11", "u12", "u21", "u22", "ncpiv_residual", "lax_residual", "flags"}, {}};
    auto row_of = [](const PIVState& x) {
        std::vector<Cell> r{x.s, x.u(0, 0), x.u(0, 1), x.u(1, 0), x.u(1, 1), Cell{}, Cell{}, std::string("ok")};
        try {
            r[5] = max_abs<double>(ncpiv_residual(x));
            r[6] = max_abs<cplx>(lax_compat_residual(x, cplx(1.3, 0.0)));
        } catch (const std::exception& e) {
            r[7] = std::string("residual unavailable: ") + e.what();
        }
        return r;
    };
    t.rows.push_back(row_of(st));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        try {
            st = integrate(st, grid[i], c.step).states.back();
            st.s = grid[i];
        } catch (const singularity_error& e) {
            std::vector<Cell> r(8);
            r[0] = e.s;
            r[7] = "singular at s=" + format_number(e.s);
            t.rows.push_back(std::move(r));
            break;
        }
        t.rows.push_back(row_of(st));
    }
    return t;
}

inline int run_painleve(const RunConfig& c, std::ostream& os) {
    write_table(painleve_table(c), c.format, os);
    return 0;
}

// ---- airy ----

inline Table airy_table(const RunConfig& c) {
    validate(c);
    if (c.n_list.empty()) throw usage_error("empty n list");
    static const std::set<int> allowed{8, 16, 32, 64};
    for (int n : c.n_list)
        if (!allowed.count(n)) throw usage_error("n list entries must be among 8, 16, 32, 64");
    const WeightFamily w = family_of(c);
    const int nmax = *std::max_element(c.n_list.begin(), c.n_list.end());
    const MOPFamily f = build_family(w, nmax);
    const std::vector<double> grid = uniform_grid(-2.0, 2.0, 9);
    Table t{{"n", "sup_error", "offdiag_max", "error"}, {}};
    t.rows.resize(c.n_list.size());
    parallel_for(c.n_list.size(), [&](std::size_t i) {
        const int n = c.n_list[i];
        std::vector<Cell> r{long(n), Cell{}, Cell{}, std::string()};
        try {
            const ScalingError e = scaling_limit_error(f, n, grid);
            r[1] = e.sup_error;
            r[2] = e.offdiag_max;
        } catch (const std::exception& e) {
            r[3] = std::string(e.what());
        }
        t.rows[i] = std::move(r);
    });
    return t;
}

inline int run_airy(const RunConfig& c, std::ostream& os) {
    write_table(airy_table(c), c.format, os);
    return 0;
}

// ---- dispatch ----

// exit codes: 0 ok (singular trajectories included), 1 check failure, 2 usage error
inline int run_command(const std::string& cmd, const RunConfig& c, std::ostream& err = std::cerr) {
    try {
        std::ostringstream buf;
        int code = 0;
        if (cmd == "verify") code = run_verify(c, buf);
        else if (cmd == "fredholm-scan") code = run_fredholm_scan(c, buf);
        else if (cmd == "painleve") code = run_painleve(c, buf);
        else if (cmd == "airy") code = run_airy(c, buf);
        else throw usage_error("unknown command " + cmd);
        if (c.out == "-") {
            std::cout << buf.str();
            std::cout.flush();
        } else {
            std::ofstream f(c.out, std::ios::binary);
            if (!f) throw usage_error("cannot open output " + c.out);
            f << buf.str();
        }
        return code;
    } catch (const usage_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ncpiv::cli
