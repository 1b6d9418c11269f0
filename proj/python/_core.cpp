#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "thetaforge/cli.hpp"
#include "thetaforge/cones.hpp"
#include "thetaforge/errfn.hpp"
#include "thetaforge/errors.hpp"
#include "thetaforge/theta.hpp"
#include "thetaforge/verify.hpp"

namespace py = pybind11;
using namespace thetaforge;

namespace {

// Exact fields take int, Fraction or "p/q" strings; floats are refused.
Rational to_rational(const py::handle& x) {
    if (py::isinstance<py::float_>(x)) throw NonExactInput("exact field given a float; use an int, Fraction or \"p/q\"");
    return parse_rational(py::str(x).cast<std::string>());
}

py::object to_fraction(const Rational& x) {
    static py::object fraction = py::module_::import("fractions").attr("Fraction");
    return fraction(x.get_str());
}

RationalVector rational_vector(const py::sequence& s) {
    RationalVector out;
    for (auto x : s) out.push_back(to_rational(x));
    return out;
}

// Columns given as a list of vectors.
RationalMatrix rational_columns(const py::sequence& cols, std::size_t n) {
    RationalMatrix m(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const RationalVector v = rational_vector(cols[j].cast<py::sequence>());
        if (v.size() != n) throw ValidationError("cone vector has the wrong length");
        for (std::size_t i = 0; i < n; ++i) m(i, j) = v[i];
    }
    return m;
}

BilinearForm form_of(const std::vector<std::vector<long>>& rows) { return BilinearForm::from_rows(rows); }

ConePair pair_of(const std::vector<std::vector<long>>& form, const py::sequence& c, const py::sequence& cprime) {
    ConePair p;
    p.form = form_of(form);
    p.c = rational_columns(c, p.form.dim());
    p.c_prime = rational_columns(cprime, p.form.dim());
    p.validate();
    return p;
}

ThetaSpec spec_of(const std::vector<std::vector<long>>& form, const py::sequence& c, const py::sequence& cprime,
                  const py::sequence& mu, const py::sequence& p, const Eigen::VectorXd& b, const Eigen::VectorXd& c_ell,
                  std::complex<double> tau, const std::string& kernel, int nodes) {
    ThetaSpec s;
    s.pair = pair_of(form, c, cprime);
    s.form = s.pair.form;
    s.mu = rational_vector(mu);
    s.p = rational_vector(p);
    s.b = b.size() ? b : Eigen::VectorXd::Zero(s.form.dim());
    s.c_ell = c_ell.size() ? c_ell : Eigen::VectorXd::Zero(s.form.dim());
    s.tau = tau;
    if (kernel == "holomorphic") {
        s.kernel = KernelKind::holomorphic;
    } else if (kernel == "completed") {
        s.kernel = KernelKind::completed;
    } else {
        throw ValidationError("kernel must be 'holomorphic' or 'completed'");
    }
    s.quad.nodes_per_axis = nodes;
    return s;
}

QuadratureSpec quad_of(int nodes) {
    QuadratureSpec q;
    q.nodes_per_axis = nodes;
    q.validate();
    return q;
}

ErrFnArgument arg_of(const Eigen::MatrixXd& frame, const Eigen::VectorXd& u) {
    return {ErrorFunctionFrame::from_columns(frame), u};
}

py::dict theta_dict(const ThetaValue& v) {
    py::dict d;
    d["value"] = v.value;
    d["n_points"] = v.n_points;
    d["tail_estimate"] = v.tail_estimate;
    d["radius"] = v.radius;
    d["abs_sum"] = v.abs_sum;
    py::list walls;
    for (const auto& w : v.wall_hits) {
        py::list row;
        for (const auto& x : w) row.append(to_fraction(x));
        walls.append(row);
    }
    d["wall_hits"] = walls;
    d["partial"] = v.partial;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "r-tuple error functions, cone hypotheses and indefinite theta series";

    // Subclasses are registered after the base so their translators run first.
    auto& base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<WallTooClose>(m, "WallTooClose", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NonExactInput>(m, "NonExactInput", base.ptr());
    py::register_exception<GenericityViolated>(m, "GenericityViolated", base.ptr());
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base.ptr());

    py::class_<ErrFnValue>(m, "ErrFnValue")
        .def_readonly("value", &ErrFnValue::value)
        .def_readonly("imag_residual", &ErrFnValue::imag_residual)
        .def_readonly("est_error", &ErrFnValue::est_error)
        .def("__repr__", [](const ErrFnValue& v) {
            std::ostringstream s;
            s.precision(17);
            s << "ErrFnValue(value=" << v.value << ", est_error=" << v.est_error << ")";
            return s.str();
        });

    m.def(
        "eval_M", [](const Eigen::MatrixXd& frame, const Eigen::VectorXd& u, int nodes) {
            return eval_M(arg_of(frame, u), quad_of(nodes));
        },
        py::arg("frame"), py::arg("u"), py::arg("nodes") = 64, "M_r for the frame whose columns are m_1..m_r.");
    m.def(
        "eval_E", [](const Eigen::MatrixXd& frame, const Eigen::VectorXd& u, int nodes) {
            return eval_E(arg_of(frame, u), quad_of(nodes));
        },
        py::arg("frame"), py::arg("u"), py::arg("nodes") = 64);
    m.def(
        "eval_E_oracle_mc",
        [](const Eigen::MatrixXd& frame, const Eigen::VectorXd& u, std::int64_t samples, std::uint64_t seed) {
            py::gil_scoped_release release;
            return eval_E_oracle_mc(arg_of(frame, u), samples, seed);
        },
        py::arg("frame"), py::arg("u"), py::arg("samples"), py::arg("seed") = 1);
    m.def(
        "bound_check",
        [](const Eigen::MatrixXd& frame, const Eigen::VectorXd& u) {
            const BoundCheck b = bound_check(arg_of(frame, u));
            return py::make_tuple(b.lhs, b.rhs, b.ok);
        },
        py::arg("frame"), py::arg("u"));

    m.def(
        "check_cone_pair",
        [](const std::vector<std::vector<long>>& form, const py::sequence& c, const py::sequence& cprime) {
            const ConeCheck check = check_cone_pair(pair_of(form, c, cprime));
            py::dict d;
            d["pass"] = check.pass;
            d["first_failed"] = check.first_failed;
            d["delta"] = to_fraction(check.top.delta);
            d["identity_validated"] = check.identity_validated;
            const Inertia& in = check.top.q_minus_inertia;
            d["q_minus_inertia"] = py::make_tuple(in.positive, in.negative, in.zero);
            d["recursion_checked"] = check.recursion.size();
            return d;
        },
        py::arg("form"), py::arg("c"), py::arg("cprime"), "Columns c_j and c'_j are given as lists of vectors.");
    m.def("a4_example_passes", [] {
        const ConeCheck c = check_cone_pair(build_a4_example());
        return c.pass && c.top.q_minus_inertia == Inertia{0, 8, 0};
    });

    m.def(
        "theta",
        [](const std::vector<std::vector<long>>& form, const py::sequence& c, const py::sequence& cprime,
           const py::sequence& mu, const py::sequence& p, const Eigen::VectorXd& b, const Eigen::VectorXd& c_ell,
           std::complex<double> tau, const std::string& kernel, double tol, std::int64_t max_points, int nodes) {
            const ThetaSpec s = spec_of(form, c, cprime, mu, p, b, c_ell, tau, kernel, nodes);
            TruncationPolicy pol;
            pol.tol = tol;
            pol.max_points = max_points;
            ThetaValue v;
            {
                py::gil_scoped_release release;
                v = eval_theta(s, pol);
            }
            return theta_dict(v);
        },
        py::arg("form"), py::arg("c"), py::arg("cprime"), py::arg("mu"), py::arg("p"),
        py::arg("b") = Eigen::VectorXd(), py::arg("c_ell") = Eigen::VectorXd(),
        py::arg("tau") = std::complex<double>(0.0, 1.0), py::arg("kernel") = "holomorphic", py::arg("tol") = 1e-8,
        py::arg("max_points") = 10'000'000, py::arg("nodes") = 64);
    m.def(
        "q_expansion",
        [](const std::vector<std::vector<long>>& form, const py::sequence& c, const py::sequence& cprime,
           const py::sequence& mu, const py::sequence& p, int terms) {
            const ThetaSpec s = spec_of(form, c, cprime, mu, p, Eigen::VectorXd(), Eigen::VectorXd(), {0.0, 1.0},
                                        "holomorphic", 64);
            const QExpansion q = q_expansion(s, terms);
            py::list rows;
            for (const auto& t : q.terms)
                rows.append(py::make_tuple(to_fraction(t.exponent), to_fraction(t.coefficient), t.wall_affected));
            return py::make_tuple(to_fraction(q.phase), rows);
        },
        py::arg("form"), py::arg("c"), py::arg("cprime"), py::arg("mu"), py::arg("p"), py::arg("terms") = 10,
        "Returns (phase, [(exponent, coefficient, wall_affected), ...]); the series is exp(pi i phase) sum c q^e.");

    m.def(
        "sign_lemma_sum",
        [](const py::sequence& g, const py::sequence& v) {
            SignLemmaInstance inst;
            inst.v = rational_vector(v);
            inst.g = RationalMatrix(inst.v.size(), inst.v.size());
            if (g.size() != inst.v.size()) throw ValidationError("G and v sizes disagree");
            for (std::size_t i = 0; i < g.size(); ++i) {
                const RationalVector row = rational_vector(g[i].cast<py::sequence>());
                if (row.size() != inst.v.size()) throw ValidationError("G must be square");
                for (std::size_t j = 0; j < row.size(); ++j) inst.g(i, j) = row[j];
            }
            return sign_lemma_sum(inst);
        },
        py::arg("G"), py::arg("v"));

    m.def(
        "run_suite",
        [](const std::string& level, std::uint64_t seed) {
            if (level != "fast" && level != "full") throw ValidationError("level must be 'fast' or 'full'");
            std::vector<CheckReport> reports;
            {
                py::gil_scoped_release release;
                reports = run_suite(level == "full" ? SuiteLevel::full : SuiteLevel::fast, seed);
            }
            py::list out;
            for (const auto& r : reports) {
                py::dict d;
                d["name"] = r.name;
                d["digest"] = r.digest;
                d["residual"] = r.residual;
                d["tolerance"] = r.tolerance;
                d["pass"] = r.pass;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("level") = "fast", py::arg("seed") = 1);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
