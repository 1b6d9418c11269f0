#include "thetaforge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "thetaforge/errors.hpp"
#include "thetaforge/verify.hpp"

namespace thetaforge::cli {

namespace {

using nlohmann::json;

json rat(const Rational& x) { return {{"num", x.get_num().get_str()}, {"den", x.get_den().get_str()}}; }

json rat_vec(const RationalVector& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(rat(x));
    return a;
}

json rat_mat(const RationalMatrix& m) {
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(rat(m(i, j)));
        a.push_back(row);
    }
    return a;
}

json index_set(IndexSet s) {
    json a = json::array();
    for (int j : s.indices()) a.push_back(j + 1);
    return a;
}

json real_vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

long integer_of(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) throw NonExactInput(where + " must be an integer, got " + v.dump());
    throw ValidationError(where + " must be an integer");
}

double real_of(const json& v, const std::string& where) {
    if (!v.is_number()) throw ValidationError(where + " must be a number");
    return v.get<double>();
}

Rational rational_of(const json& v, const std::string& where) {
    if (v.is_number_integer()) return Rational(mpz_class(v.get<long>()));
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const std::exception&) {
            throw ValidationError(where + " is not a rational number: " + v.dump());
        }
    }
    if (v.is_number_float()) throw NonExactInput(where + " must be exact: write it as a string such as \"1/3\"");
    throw ValidationError(where + " must be an integer or a rational string");
}

const json& array_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw ValidationError(where + " must be a list");
    return v;
}

RationalVector rational_vector(const json& v, const std::string& where, std::size_t n) {
    array_of(v, where);
    if (v.size() != n) throw ValidationError(where + " must have length " + std::to_string(n));
    RationalVector out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(rational_of(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Eigen::VectorXd real_vector(const json& v, const std::string& where, std::size_t n) {
    array_of(v, where);
    if (v.size() != n) throw ValidationError(where + " must have length " + std::to_string(n));
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = real_of(v[i], where);
    return out;
}

BilinearForm parse_form(const json& v) {
    array_of(v, "bilinear_form");
    const std::size_t n = v.size();
    if (n == 0) throw ValidationError("bilinear_form is empty");
    std::vector<std::vector<long>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        array_of(v[i], "bilinear_form row");
        if (v[i].size() != n) throw ValidationError("bilinear_form must be square");
        std::vector<long> row;
        for (const auto& x : v[i]) row.push_back(integer_of(x, "bilinear_form entry"));
        rows.push_back(row);
    }
    return BilinearForm::from_rows(rows);
}

RationalMatrix parse_columns(const json& v, const std::string& where, std::size_t n) {
    array_of(v, where);
    if (v.empty()) throw ValidationError(where + " needs at least one vector");
    RationalMatrix out(n, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const RationalVector col = rational_vector(v[j], where + "[" + std::to_string(j) + "]", n);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json parse_json(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(where + " is not valid JSON: " + e.what());
    }
}

json system_json(const ConeSystemReport& r) {
    json per_p = json::array();
    for (const auto& [p, ok] : r.per_p_positive_definite) per_p.push_back({{"p", index_set(p)}, {"positive_definite", ok}});
    json out = {{"s", index_set(r.s)},
                {"p", index_set(r.p)},
                {"r", r.r},
                {"delta", rat(r.delta)},
                {"cofactors_jjprime", rat_vec(r.cofactors_jjprime)},
                {"reduced_cofactor_matrix", rat_mat(r.reduced_cofactor_matrix)},
                {"per_p_positive_definite", per_p},
                {"pass", r.pass},
                {"first_failed", r.first_failed}};
    if (r.q_minus.rows() > 0) {
        out["q_minus"] = rat_mat(r.q_minus);
        out["q_minus_inertia"] = {{"positive", r.q_minus_inertia.positive},
                                  {"negative", r.q_minus_inertia.negative},
                                  {"zero", r.q_minus_inertia.zero}};
    }
    return out;
}

json theta_value_json(const ThetaValue& v) {
    json walls = json::array();
    for (const auto& w : v.wall_hits) walls.push_back(rat_vec(w));
    return {{"mode", "value"},
            {"value", {{"re", v.value.real()}, {"im", v.value.imag()}}},
            {"n_points", v.n_points},
            {"tail_estimate", v.tail_estimate},
            {"radius", v.radius},
            {"abs_sum", v.abs_sum},
            {"wall_hits", walls},
            {"partial", v.partial}};
}

std::vector<double> parse_csv(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("not a number: '" + item + "'");
        }
    }
    return out;
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

}  // namespace

JobConfig parse_job_config(const std::string& text) {
    const json doc = parse_json(text, "config");
    reject_unknown(doc, "config", {"bilinear_form", "cone_pair", "theta", "policy", "quadrature"});
    JobConfig cfg;
    if (doc.contains("quadrature")) {
        const json& q = doc["quadrature"];
        reject_unknown(q, "quadrature", {"nodes_per_axis"});
        if (q.contains("nodes_per_axis"))
            cfg.quad.nodes_per_axis = static_cast<int>(integer_of(q["nodes_per_axis"], "nodes_per_axis"));
        cfg.quad.validate();
    }
    if (doc.contains("policy")) {
        const json& p = doc["policy"];
        reject_unknown(p, "policy", {"tol", "max_points"});
        if (p.contains("tol")) cfg.policy.tol = real_of(p["tol"], "policy.tol");
        if (p.contains("max_points")) cfg.policy.max_points = integer_of(p["max_points"], "policy.max_points");
        cfg.policy.validate();
    }
    if (doc.contains("bilinear_form")) cfg.form = parse_form(doc["bilinear_form"]);
    if (doc.contains("cone_pair")) {
        if (!cfg.form) throw ValidationError("cone_pair needs bilinear_form");
        const json& cp = doc["cone_pair"];
        reject_unknown(cp, "cone_pair", {"c", "cprime"});
        if (!cp.contains("c") || !cp.contains("cprime")) throw ValidationError("cone_pair needs c and cprime");
        const std::size_t n = static_cast<std::size_t>(cfg.form->dim());
        ConePair pair{parse_columns(cp["c"], "cone_pair.c", n), parse_columns(cp["cprime"], "cone_pair.cprime", n),
                      *cfg.form};
        for (const auto* m : {&pair.c, &pair.c_prime})
            for (std::size_t i = 0; i < m->rows(); ++i)
                for (std::size_t j = 0; j < m->cols(); ++j)
                    if ((*m)(i, j).get_den() != 1) throw NonExactInput("cone vectors must be integral");
        pair.validate();
        cfg.pair = pair;
    }
    if (doc.contains("theta")) {
        if (!cfg.form) throw ValidationError("theta needs bilinear_form");
        const json& t = doc["theta"];
        reject_unknown(t, "theta", {"mu", "p", "b", "c_ell", "tau", "kernel", "lambda"});
        const std::size_t n = static_cast<std::size_t>(cfg.form->dim());
        ThetaSpec s;
        s.form = *cfg.form;
        s.mu = t.contains("mu") ? rational_vector(t["mu"], "theta.mu", n) : RationalVector(n, Rational(0));
        s.p = t.contains("p") ? rational_vector(t["p"], "theta.p", n) : RationalVector(n, Rational(0));
        s.b = t.contains("b") ? real_vector(t["b"], "theta.b", n) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        s.c_ell = t.contains("c_ell") ? real_vector(t["c_ell"], "theta.c_ell", n)
                                      : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        if (t.contains("tau")) {
            const Eigen::VectorXd tau = real_vector(t["tau"], "theta.tau", 2);
            s.tau = {tau(0), tau(1)};
        }
        if (t.contains("lambda")) s.lambda = static_cast<int>(integer_of(t["lambda"], "theta.lambda"));
        const std::string kernel = t.value("kernel", std::string("holomorphic"));
        if (kernel == "holomorphic") {
            s.kernel = KernelKind::holomorphic;
        } else if (kernel == "completed") {
            s.kernel = KernelKind::completed;
        } else {
            throw ValidationError("theta.kernel must be \"holomorphic\" or \"completed\"");
        }
        if (!cfg.pair) throw ValidationError("theta kernels need cone_pair");
        s.pair = *cfg.pair;
        s.quad = cfg.quad;
        s.validate();
        cfg.theta = s;
    }
    return cfg;
}

JobConfig load_job_config(const std::string& path) { return parse_job_config(read_file(path)); }

ErrorFunctionFrame parse_frame(const std::string& spec) {
    if (spec.size() >= 2 && spec[0] == 'I' && std::all_of(spec.begin() + 1, spec.end(), ::isdigit)) {
        const int r = std::stoi(spec.substr(1));
        if (r < 1 || r > 8) throw ValidationError("identity frame rank must be 1..8");
        return ErrorFunctionFrame::from_columns(Eigen::MatrixXd::Identity(r, r));
    }
    std::vector<std::vector<double>> rows;
    if (spec.find(',') != std::string::npos || spec.find(';') != std::string::npos ||
        (!spec.empty() && (std::isdigit(static_cast<unsigned char>(spec[0])) || spec[0] == '-' || spec[0] == '.'))) {
        std::stringstream ss(spec);
        std::string row;
        while (std::getline(ss, row, ';')) rows.push_back(parse_csv(row));
    } else {
        const json doc = parse_json(read_file(spec), "frame file");
        reject_unknown(doc, "frame file", {"frame"});
        if (!doc.contains("frame")) throw ValidationError("frame file needs a \"frame\" key");
        for (const auto& r : array_of(doc["frame"], "frame")) {
            std::vector<double> row;
            for (const auto& x : array_of(r, "frame row")) row.push_back(real_of(x, "frame entry"));
            rows.push_back(row);
        }
    }
    const std::size_t r = rows.size();
    if (r == 0) throw ValidationError("frame is empty");
    Eigen::MatrixXd m(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != r) throw ValidationError("frame must be square");
        for (std::size_t j = 0; j < r; ++j) m(i, j) = rows[i][j];
    }
    if (!m.allFinite()) throw ValidationError("frame entries must be finite");
    return ErrorFunctionFrame::from_columns(m);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"theta_forge: r-tuple error functions, cone checks and indefinite theta series"};
    app.require_subcommand(1);

    std::string kind = "E", frame_spec, u_csv;
    int nodes = 64;
    std::int64_t mc_samples = 0;
    std::uint64_t seed = 1;
    auto* errfn = app.add_subcommand("errfn", "evaluate M_r or E_r at one point");
    errfn->add_option("--kind", kind, "M or E")->check(CLI::IsMember({"M", "E"}));
    errfn->add_option("--frame", frame_spec, "I<r>, inline rows \"a,b;c,d\", or a JSON file")->required();
    errfn->add_option("--u", u_csv, "comma separated argument")->required();
    errfn->add_option("--nodes", nodes, "quadrature nodes per axis");
    errfn->add_option("--mc-samples", mc_samples, "also run the Monte Carlo oracle for E");
    errfn->add_option("--seed", seed, "Monte Carlo seed");

    std::string config, builtin;
    auto* cones = app.add_subcommand("cones", "check the cone hypotheses exactly");
    auto* cones_config = cones->add_option("--config", config, "job config with bilinear_form and cone_pair");
    cones->add_option("--builtin", builtin, "a4 or rank1")->check(CLI::IsMember({"a4", "rank1"}))->excludes(cones_config);

    std::string mode = "value";
    int terms = 10;
    double tol = 0.0;
    auto* theta = app.add_subcommand("theta", "theta value or q-expansion");
    theta->add_option("--config", config, "job config")->required();
    theta->add_option("--mode", mode, "value or qexp")->check(CLI::IsMember({"value", "qexp"}));
    theta->add_option("--terms", terms, "number of nonzero q-coefficients")->check(CLI::PositiveNumber);
    theta->add_option("--tol", tol, "tail tolerance (overrides the config)")->check(CLI::PositiveNumber);

    std::string level = "fast";
    auto* verify = app.add_subcommand("verify", "run the identity checks");
    verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    verify->add_option("--seed", seed, "suite seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    try {
        if (errfn->parsed()) {
            QuadratureSpec quad;
            quad.nodes_per_axis = nodes;
            quad.validate();
            const ErrFnArgument arg{parse_frame(frame_spec), Eigen::VectorXd()};
            const std::vector<double> u = parse_csv(u_csv);
            if (static_cast<int>(u.size()) != arg.frame.rank())
                throw ValidationError("--u has " + std::to_string(u.size()) + " entries, frame rank is " +
                                      std::to_string(arg.frame.rank()));
            const ErrFnArgument a{arg.frame, Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()))};
            const ErrFnValue v = kind == "M" ? eval_M(a, quad) : eval_E(a, quad);
            json doc = {{"kind", kind},
                        {"rank", a.frame.rank()},
                        {"u", real_vec(a.u)},
                        {"value", v.value},
                        {"est_error", v.est_error},
                        {"imag_residual", v.imag_residual}};
            if (mc_samples > 0) {
                const ErrFnValue mc = eval_E_oracle_mc(a, mc_samples, seed);
                doc["monte_carlo"] = {{"value", mc.value}, {"stderr", mc.est_error}, {"samples", mc_samples}, {"seed", seed}};
            }
            emit(out, doc);
            err << kind << "_" << a.frame.rank() << " = " << v.value << " (est_error " << v.est_error << ")\n";
            return kExitOk;
        }
        if (cones->parsed()) {
            ConePair pair;
            if (builtin == "a4") {
                pair = build_a4_example();
            } else if (builtin == "rank1") {
                pair = build_rank_one_example();
            } else {
                if (config.empty()) throw ValidationError("cones needs --config or --builtin");
                const JobConfig cfg = load_job_config(config);
                if (!cfg.pair) throw ValidationError("config has no cone_pair");
                pair = *cfg.pair;
            }
            const ConeCheck check = check_cone_pair(pair);
            json rec = json::array();
            for (const auto& r : check.recursion) rec.push_back(system_json(r));
            emit(out, {{"top", system_json(check.top)},
                       {"recursion", rec},
                       {"identity_validated", check.identity_validated},
                       {"pass", check.pass},
                       {"first_failed", check.first_failed}});
            err << (check.pass ? "pass" : "fail: " + check.first_failed) << "\n";
            return check.pass ? kExitOk : kExitFail;
        }
        if (theta->parsed()) {
            JobConfig cfg = load_job_config(config);
            if (!cfg.theta) throw ValidationError("config has no theta section");
            if (tol > 0.0) cfg.policy.tol = tol;
            if (mode == "qexp") {
                const QExpansion q = q_expansion(*cfg.theta, terms, cfg.policy);
                json rows = json::array();
                for (const auto& t : q.terms)
                    rows.push_back(
                        {{"exponent", rat(t.exponent)}, {"coefficient", rat(t.coefficient)}, {"wall_affected", t.wall_affected}});
                emit(out, {{"mode", "qexp"},
                           {"phase", rat(q.phase)},
                           {"complete_below", rat(q.complete_below)},
                           {"radius", q.radius},
                           {"n_points", q.n_points},
                           {"terms", rows}});
                err << q.terms.size() << " coefficients, complete below q^" << q.complete_below.get_str() << "\n";
                return kExitOk;
            }
            try {
                const ThetaValue v = eval_theta(*cfg.theta, cfg.policy);
                emit(out, theta_value_json(v));
                err << "theta = " << v.value.real() << (v.value.imag() < 0 ? " - " : " + ") << std::abs(v.value.imag())
                    << "i over " << v.n_points << " points, tail " << v.tail_estimate << "\n";
                return kExitOk;
            } catch (const BudgetExceeded& e) {
                emit(out, theta_value_json(e.partial()));
                err << "budget exceeded: " << e.what() << "\n";
                return kExitBudget;
            }
        }
        if (verify->parsed()) {
            const auto reports = run_suite(level == "full" ? SuiteLevel::full : SuiteLevel::fast, seed);
            json rows = json::array();
            bool all = true;
            for (const auto& r : reports) {
                all = all && r.pass;
                rows.push_back({{"name", r.name},
                                {"digest", r.digest},
                                {"residual", r.residual},
                                {"tolerance", r.tolerance},
                                {"pass", r.pass},
                                {"detail", r.detail}});
                err << (r.pass ? "PASS " : "FAIL ") << r.name << " residual " << r.residual << "\n";
            }
            emit(out, {{"level", level}, {"seed", seed}, {"reports", rows}, {"pass", all}});
            return all ? kExitOk : kExitFail;
        }
    } catch (const WallTooClose& e) {
        err << "wall too close: " << e.what() << "\n";
        return kExitWall;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const Error& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const json::exception& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitInvalid;
}

}  // namespace thetaforge::cli
