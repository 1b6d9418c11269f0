#include "thetaforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "thetaforge/boosted.hpp"
#include "thetaforge/cones.hpp"
#include "thetaforge/errors.hpp"
#include "thetaforge/parallel.hpp"
#include "thetaforge/theta.hpp"

namespace thetaforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

std::mt19937_64 rng_for(std::uint64_t seed, const std::string& name) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(std::hash<std::string>{}(name))};
    return std::mt19937_64(seq);
}

Eigen::VectorXd normal_vector(std::mt19937_64& gen, int n, double sigma) {
    std::normal_distribution<double> nd(0.0, sigma);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(gen);
    return v;
}

ErrorFunctionFrame random_frame(std::mt19937_64& gen, int r) {
    std::normal_distribution<double> nd(0.0, 0.5);
    while (true) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) m(i, j) += nd(gen);
        try {
            ErrorFunctionFrame f = ErrorFunctionFrame::from_columns(m);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
            const auto& sv = svd.singularValues();
            if (sv(r - 1) > 0.15 * sv(0)) return f;
        } catch (const SingularFrame&) {
        }
    }
}

// Argument at least `gap` away from every wall (unit dual normals).
Eigen::VectorXd generic_argument(std::mt19937_64& gen, const ErrorFunction& f, double sigma, double gap) {
    while (true) {
        Eigen::VectorXd u = normal_vector(gen, f.rank(), sigma);
        if (f.wall_distance(u) >= gap) return u;
    }
}

// Cone of s timelike columns in signature (s, 1).
ConeMatrix random_cone(std::mt19937_64& gen, int s) {
    std::vector<std::vector<long>> rows(s + 1, std::vector<long>(s + 1, 0));
    for (int i = 0; i < s; ++i) rows[i][i] = 1;
    rows[s][s] = -1;
    const BilinearForm form = BilinearForm::from_rows(rows);
    std::uniform_real_distribution<double> ud(-0.4, 0.4);
    while (true) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(s + 1, s);
        for (int j = 0; j < s; ++j) {
            c(j, j) = 1.0;
            for (int i = 0; i <= s; ++i)
                if (i != j) c(i, j) += ud(gen);
        }
        try {
            return build_cone(c, form);
        } catch (const NotTimelike&) {
        }
    }
}

Eigen::VectorXd to_eigen(const RationalVector& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get_d();
    return out;
}

std::string num(double x) {
    std::ostringstream out;
    out << std::setprecision(6) << x;
    return out.str();
}

// Sign products of the lemma summands; `zero_tol` > 0 treats tiny entries as vanishing.
long lemma_sum(const RationalMatrix& g, const RationalVector& v, double zero_tol) {
    const int n = static_cast<int>(v.size());
    long total = 0;
    for (IndexSet s : subsets_of_range(n)) {
        const std::vector<int> in = s.indices();
        const std::vector<int> out = s.complement(n).indices();
        const std::size_t k = in.size();
        RationalVector y_s(k);
        if (k > 0) {
            RationalMatrix gss(k, k);
            RationalVector vs(k);
            for (std::size_t a = 0; a < k; ++a) {
                vs[a] = v[in[a]];
                for (std::size_t b = 0; b < k; ++b) gss(a, b) = g(in[a], in[b]);
            }
            y_s = mat_vec(inverse(gss), vs);  // G_SS^{-1} v_S
        }
        int sign = 1;
        auto take = [&](const Rational& x) {
            if (x == 0 || (zero_tol > 0.0 && std::fabs(x.get_d()) < zero_tol))
                throw GenericityViolated("a sign argument of the lemma sum vanishes");
            sign *= sign_of(x);
        };
        for (std::size_t a = 0; a < k; ++a) take(-y_s[a]);
        for (int i : out) {
            Rational x = v[i];
            for (std::size_t a = 0; a < k; ++a) x -= g(i, in[a]) * y_s[a];
            take(x);
        }
        total += sign;
    }
    return total;
}

ThetaSpec law_spec(KernelKind kernel) {
    ThetaSpec s;
    s.pair = build_rank_one_example();
    s.form = s.pair.form;
    s.mu = {0, 0};
    s.p = {1, 1};
    s.b = Eigen::Vector2d(0.1, 0.23);
    s.c_ell = Eigen::Vector2d(0.3, -0.17);
    s.tau = {0.1, 1.0};
    s.kernel = kernel;
    return s;
}

// diag(3,-3) with a class that is not its own negative, so the holomorphic
// series at b = c = 0 does not cancel by symmetry.
ThetaSpec qexp_spec() {
    ThetaSpec s;
    s.form = BilinearForm::from_rows({{3, 0}, {0, -3}});
    s.pair.form = s.form;
    s.pair.c = RationalMatrix::from_rows({{1}, {0}});
    s.pair.c_prime = RationalMatrix::from_rows({{2}, {1}});
    s.mu = {Rational(1, 3), 0};
    s.p = {1, 1};
    s.b = Eigen::Vector2d::Zero();
    s.c_ell = Eigen::Vector2d::Zero();
    s.tau = {0.0, 1.0};
    return s;
}

const char* kernel_name(KernelKind k) { return k == KernelKind::holomorphic ? "holomorphic" : "completed"; }

}  // namespace

long sign_lemma_sum(const SignLemmaInstance& inst) {
    const std::size_t n = inst.v.size();
    if (n == 0 || inst.g.rows() != n || inst.g.cols() != n) throw ValidationError("G and v sizes disagree");
    if (n > 16) throw RankTooLarge("sign lemma instances are limited to n <= 16");
    if (!positive_definite(inst.g)) throw ValidationError("G is not positive definite");
    return lemma_sum(inst.g, inst.v, 0.0);
}

long sign_identity_specialized(const ErrorFunctionFrame& frame, const Eigen::VectorXd& u, IndexSet n) {
    const int r = frame.rank();
    if (u.size() != r) throw ValidationError("argument length does not match frame rank");
    if (n.empty() || !n.subset_of(IndexSet::full(r))) throw ValidationError("N must be a nonempty subset of [r]");
    const std::vector<int> idx = n.indices();
    const std::size_t k = idx.size();
    std::vector<RationalVector> w(k, RationalVector(r));
    for (std::size_t a = 0; a < k; ++a)
        for (int i = 0; i < r; ++i) w[a][i] = exact_from_double(frame.w(i, idx[a]));
    RationalVector ue(r);
    for (int i = 0; i < r; ++i) ue[i] = exact_from_double(u(i));
    RationalMatrix g(k, k);
    RationalVector v(k);
    for (std::size_t a = 0; a < k; ++a) {
        v[a] = dot(w[a], ue);
        for (std::size_t b = 0; b < k; ++b) g(a, b) = dot(w[a], w[b]);
    }
    return lemma_sum(g, v, 1e-10);
}

SignLemmaInstance random_sign_lemma_instance(std::uint64_t seed, int n) {
    std::mt19937_64 gen = rng_for(seed, "sign_lemma_instance_" + std::to_string(n));
    std::uniform_int_distribution<long> entry(-3, 3), diag(1, 3), den(1, 4), vnum(-20, 20), vden(1, 7);
    while (true) {
        RationalMatrix l(n, n);
        for (int i = 0; i < n; ++i) {
            l(i, i) = diag(gen);
            for (int j = 0; j < i; ++j) l(i, j) = entry(gen);
        }
        RationalMatrix g = (l * l.transpose()).scaled(Rational(1, static_cast<long>(den(gen))));
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) g(i, j).canonicalize();
        RationalVector v(n);
        for (auto& x : v) {
            x = Rational(mpz_class(vnum(gen)), mpz_class(vden(gen)));
            x.canonicalize();
        }
        try {
            lemma_sum(g, v, 0.0);
            return {g, v};
        } catch (const GenericityViolated&) {
        }
    }
}

CheckReport make_report(std::string name, std::string inputs, double residual, double tolerance, std::string detail) {
    CheckReport r;
    r.digest = fnv1a(name + "|" + inputs);
    r.name = std::move(name);
    r.residual = residual;
    r.tolerance = tolerance;
    r.pass = residual <= tolerance;
    r.detail = std::move(detail);
    return r;
}

CheckReport check_closed_forms() {
    const ErrorFunction f(ErrorFunctionFrame::from_columns(Eigen::MatrixXd::Identity(1, 1)));
    double worst = 0.0;
    for (int k = 1; k <= 30; ++k)
        for (int sgn : {1, -1}) {
            const double u = sgn * 0.1 * k;
            Eigen::VectorXd v(1);
            v << u;
            const double e_ref = std::erf(std::sqrt(kPi) * u);
            const double m_ref = -sgn * std::erfc(std::sqrt(kPi) * std::fabs(u));
            worst = std::max({worst, std::fabs(f.error(v).value - e_ref), std::fabs(f.complementary(v).value - m_ref)});
        }
    return make_report("errfn_rank1_closed_form", "u=+-0.1..3", worst, 1e-10);
}

CheckReport check_mc_oracle(std::uint64_t seed, int n_frames, std::int64_t samples) {
    std::mt19937_64 gen = rng_for(seed, "mc");
    std::vector<ErrFnArgument> args;
    for (int i = 0; i < n_frames; ++i) {
        const int r = 2 + i % 2;
        ErrFnArgument a{random_frame(gen, r), Eigen::VectorXd()};
        a.u = generic_argument(gen, ErrorFunction(a.frame), 0.6, 1e-3);
        args.push_back(std::move(a));
    }
    int outside = 0;
    double worst = 0.0;
    for (int i = 0; i < n_frames; ++i) {
        const double e = eval_E(args[i]).value;
        const ErrFnValue mc = eval_E_oracle_mc(args[i], samples, seed + 7919ULL * static_cast<std::uint64_t>(i));
        const double z = std::fabs(e - mc.value) / std::max(mc.est_error, 1e-300);
        worst = std::max(worst, z);
        if (z > 3.0) ++outside;
    }
    const double frac = n_frames > 0 ? static_cast<double>(outside) / n_frames : 0.0;
    return make_report("errfn_E_vs_monte_carlo",
                       "seed=" + std::to_string(seed) + " frames=" + std::to_string(n_frames) +
                           " samples=" + std::to_string(samples),
                       frac, 0.01, "outside 3 sigma: " + std::to_string(outside) + ", max z " + num(worst));
}

std::vector<CheckReport> check_decompositions(std::uint64_t seed, int n_instances) {
    std::mt19937_64 gen = rng_for(seed, "decomp");
    double worst_m = 0.0, worst_e = 0.0;
    for (int i = 0; i < n_instances; ++i) {
        const int r = 1 + i % 3;
        const ErrFnArgument a{random_frame(gen, r), Eigen::VectorXd()};
        const ErrorFunction f(a.frame);
        const ErrFnArgument arg{a.frame, generic_argument(gen, f, 0.6, 1e-3)};
        worst_m = std::max(worst_m, std::fabs(sum_terms(decompose_M_into_E(arg)) - f.complementary(arg.u).value));
        worst_e = std::max(worst_e, std::fabs(sum_terms(decompose_E_into_M(arg)) - f.error_radial(arg.u).value));
    }
    const std::string in = "seed=" + std::to_string(seed) + " n=" + std::to_string(n_instances);
    return {make_report("errfn_M_from_E_terms", in, worst_m, 1e-7),
            make_report("errfn_E_from_M_terms", in, worst_e, 1e-7)};
}

std::vector<CheckReport> check_vigneras(std::uint64_t seed, int n_per_rank) {
    std::mt19937_64 gen = rng_for(seed, "vigneras");
    const double h = 1e-3;
    std::vector<CheckReport> out;
    for (FunctionKind kind : {FunctionKind::E, FunctionKind::M}) {
        const std::string kname = kind == FunctionKind::E ? "E" : "M";
        double worst_e = kInf, worst_b = kInf;
        for (int r = 1; r <= 3; ++r)
            for (int i = 0; i < n_per_rank; ++i) {
                const ErrFnArgument a{random_frame(gen, r), Eigen::VectorXd()};
                const ErrFnArgument arg{a.frame, generic_argument(gen, ErrorFunction(a.frame), 0.7, 0.05)};
                const double r1 = std::fabs(vigneras_residual(arg, kind, h));
                const double r2 = std::fabs(vigneras_residual(arg, kind, h / 2));
                worst_e = std::min(worst_e, r1 / r2);

                const ConeMatrix cone = random_cone(gen, r);
                const ErrorFunction bf(cone.frame());
                Eigen::VectorXd x;
                do {
                    x = normal_vector(gen, cone.dim(), 0.7);
                } while (bf.wall_distance(cone.coordinates(x)) < 0.05);
                const BoostedArgument barg{cone, x};
                const double b1 = std::fabs(boosted_vigneras_residual(barg, kind, h));
                const double b2 = std::fabs(boosted_vigneras_residual(barg, kind, h / 2));
                worst_b = std::min(worst_b, b1 / b2);
            }
        const std::string in = "seed=" + std::to_string(seed) + " n=" + std::to_string(n_per_rank) + " h=1e-3";
        out.push_back(make_report("vigneras_" + kname + "_euclidean", in, 1.0 / worst_e, 1.0 / 3.5,
                                  "min shrink factor " + num(worst_e)));
        out.push_back(make_report("vigneras_" + kname + "_boosted", in, 1.0 / worst_b, 1.0 / 3.5,
                                  "min shrink factor " + num(worst_b)));
    }
    return out;
}

CheckReport check_m_bound(std::uint64_t seed, int n_samples, double rhs_scale) {
    std::mt19937_64 gen = rng_for(seed, "bound");
    int violations = 0;
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const int r = 1 + i % 3;
        const ErrFnArgument a{random_frame(gen, r), Eigen::VectorXd()};
        const ErrFnArgument arg{a.frame, generic_argument(gen, ErrorFunction(a.frame), 0.5, 1e-6)};
        const BoundCheck b = bound_check(arg, {}, rhs_scale);
        if (!b.ok) ++violations;
        worst = std::max(worst, b.lhs / b.rhs);
    }
    return make_report("errfn_M_bound",
                       "seed=" + std::to_string(seed) + " n=" + std::to_string(n_samples) + " rhs_scale=" + num(rhs_scale),
                       violations, 0.0, "max lhs/rhs " + num(worst));
}

std::vector<CheckReport> check_discontinuity(std::uint64_t seed, int n_instances) {
    std::mt19937_64 gen = rng_for(seed, "discontinuity");
    const double eps = 1e-8;
    double worst_jump = 0.0, worst_e = 0.0;
    int done = 0;
    while (done < n_instances) {
        const ErrorFunctionFrame frame = random_frame(gen, 2);
        const ErrorFunction f(frame);
        const int j = done % 2;
        const Eigen::VectorXd w = frame.w.col(j).normalized();
        Eigen::VectorXd u0 = normal_vector(gen, 2, 0.7);
        u0 -= w.dot(u0) * w;
        const Eigen::VectorXd other = frame.w.col(1 - j).normalized();
        if (std::fabs(other.dot(u0)) < 0.05) continue;
        const ErrFnArgument at{frame, u0};
        const IndexSet s = IndexSet::single(1 - j);
        const int plus[1] = {1}, minus[1] = {-1};
        const double jump_ref = discontinuity_limit(at, s, plus) - discontinuity_limit(at, s, minus);
        const Eigen::VectorXd up = u0 + eps * w, dn = u0 - eps * w;
        const double jump = f.complementary(up).value - f.complementary(dn).value;
        worst_jump = std::max(worst_jump, std::fabs(jump - jump_ref));
        const double e_up = sum_terms(decompose_E_into_M({frame, up}));
        const double e_dn = sum_terms(decompose_E_into_M({frame, dn}));
        worst_e = std::max(worst_e, std::fabs(e_up - e_dn));
        ++done;
    }
    const std::string in = "seed=" + std::to_string(seed) + " n=" + std::to_string(n_instances);
    return {make_report("errfn_M_wall_jump", in, worst_jump, 1e-6),
            make_report("errfn_E_terms_continuous", in, worst_e, 1e-6)};
}

CheckReport check_sign_lemma(std::uint64_t seed, int n_per_size, int max_size) {
    long nonzero = 0;
    for (int n = 1; n <= max_size; ++n) {
        std::vector<long> sums(n_per_size);
        parallel_chunks(static_cast<std::size_t>(n_per_size), [&](std::size_t i) {
            sums[i] = sign_lemma_sum(random_sign_lemma_instance(seed + 1000003ULL * i, n));
        });
        for (long s : sums)
            if (s != 0) ++nonzero;
    }
    return make_report("sign_lemma_exact",
                       "seed=" + std::to_string(seed) + " per_size=" + std::to_string(n_per_size) +
                           " max_n=" + std::to_string(max_size),
                       static_cast<double>(nonzero), 0.0);
}

CheckReport check_sign_identity(std::uint64_t seed, int n_frames) {
    std::mt19937_64 gen = rng_for(seed, "sign_identity");
    long nonzero = 0;
    int done = 0;
    while (done < n_frames) {
        const ErrorFunctionFrame frame = random_frame(gen, 3);
        const Eigen::VectorXd u = normal_vector(gen, 3, 0.7);
        try {
            std::vector<long> sums;
            for (IndexSet n : subsets_of_range(3))
                if (!n.empty()) sums.push_back(sign_identity_specialized(frame, u, n));
            for (long s : sums)
                if (s != 0) ++nonzero;
            ++done;
        } catch (const GenericityViolated&) {
        }
    }
    return make_report("sign_identity_frames", "seed=" + std::to_string(seed) + " n=" + std::to_string(n_frames),
                       static_cast<double>(nonzero), 0.0);
}

CheckReport check_boosted_shadow(std::uint64_t seed, int n_instances) {
    std::mt19937_64 gen = rng_for(seed, "boosted_shadow");
    double worst = 0.0;
    for (int i = 0; i < n_instances; ++i) {
        const ConeMatrix cone = random_cone(gen, 1 + i % 3);
        const ErrorFunction f(cone.frame());
        Eigen::VectorXd x;
        do {
            x = normal_vector(gen, cone.dim(), 0.7);
        } while (f.wall_distance(cone.coordinates(x)) < 1e-3);
        const BoostedArgument arg{cone, x};
        worst = std::max(worst, std::fabs(boosted_shadow(arg, FunctionKind::E) - boosted_shadow_from_perp(arg)));
    }
    return make_report("boosted_shadow_perp_form", "seed=" + std::to_string(seed) + " n=" + std::to_string(n_instances),
                       worst, 1e-8);
}

CheckReport check_a4_example() {
    const ConeCheck c = check_cone_pair(build_a4_example());
    const Inertia want{0, 8, 0};
    const bool ok = c.pass && c.top.q_minus_inertia == want;
    return make_report("cones_a4_example", "builtin a4", ok ? 0.0 : 1.0, 0.0,
                       ok ? "pass, Q_- inertia (0,8)" : "failed: " + c.first_failed);
}

std::vector<CheckReport> check_cofactor_identity(std::uint64_t seed, int n_x, int n_pairs) {
    std::mt19937_64 gen = rng_for(seed, "cofactor");
    std::uniform_int_distribution<long> xnum(-50, 50), xden(1, 11);
    auto random_x = [&](int n) {
        RationalVector x(n);
        for (auto& v : x) {
            v = Rational(mpz_class(xnum(gen)), mpz_class(xden(gen)));
            v.canonicalize();
        }
        return x;
    };
    auto failures_for = [&](const ConePair& pair) {
        const ConeSystemReport top = check_cone_system(pair.c, pair.c_prime, pair.form);
        int bad = 0;
        for (int i = 0; i < n_x; ++i)
            if (!determinant_identity_holds(pair, top, random_x(pair.dim()))) ++bad;
        return bad;
    };
    const int a4_bad = failures_for(build_a4_example());

    std::uniform_int_distribution<long> a_entry(1, 4), v_entry(-3, 3), n_extra(0, 1);
    int found = 0, pair_bad = 0;
    while (found < n_pairs) {
        const int n = 2 + static_cast<int>(n_extra(gen));
        std::vector<std::vector<long>> rows(n, std::vector<long>(n, 0));
        rows[0][0] = a_entry(gen);
        for (int i = 1; i < n; ++i) rows[i][i] = -a_entry(gen);
        ConePair pair;
        pair.form = BilinearForm::from_rows(rows);
        pair.c = RationalMatrix(n, 1);
        pair.c_prime = RationalMatrix(n, 1);
        for (int i = 0; i < n; ++i) {
            pair.c(i, 0) = v_entry(gen);
            pair.c_prime(i, 0) = v_entry(gen);
        }
        try {
            if (!check_cone_pair(pair).pass) continue;
        } catch (const Error&) {
            continue;
        }
        pair_bad += failures_for(pair);
        ++found;
    }
    const std::string in = "seed=" + std::to_string(seed) + " x=" + std::to_string(n_x);
    return {make_report("cones_cofactor_identity_a4", in, a4_bad, 0.0),
            make_report("cones_cofactor_identity_rank1", in + " pairs=" + std::to_string(n_pairs), pair_bad, 0.0)};
}

std::vector<CheckReport> check_theta_convergence() {
    std::vector<CheckReport> out;
    for (KernelKind k : {KernelKind::holomorphic, KernelKind::completed}) {
        ThetaSpec s = law_spec(k);
        s.tau = {0.0, 1.0};
        const ThetaValue v = eval_theta(s, {1e-12});
        const ThetaValue w = eval_theta_at_radius(s, 2.0 * v.radius);
        out.push_back(make_report(std::string("theta_radius_doubling_") + kernel_name(k), "rank1 diag(1,-1) tau=i",
                                  std::abs(w.value - v.value), 1e-9,
                                  "R=" + num(v.radius) + " points=" + std::to_string(v.n_points)));
    }
    const ThetaSpec q = qexp_spec();
    const int n_terms = 10;
    const QExpansion a = q_expansion(q, n_terms);
    const QExpansion b = q_expansion(q, n_terms, {}, 2.0);
    int non_integral = 0, mismatched = 0;
    for (const auto& t : a.terms)
        if (!t.wall_affected && t.coefficient.get_den() != 1) ++non_integral;
    if (a.terms.size() != b.terms.size()) {
        mismatched = n_terms;
    } else {
        for (std::size_t i = 0; i < a.terms.size(); ++i)
            if (a.terms[i].exponent != b.terms[i].exponent || a.terms[i].coefficient != b.terms[i].coefficient)
                ++mismatched;
    }
    const std::string in = "diag(3,-3) mu=(1/3,0) p=(1,1) terms=" + std::to_string(n_terms);
    out.push_back(make_report("theta_qexp_integral", in, non_integral, 0.0));
    out.push_back(make_report("theta_qexp_radius_doubling", in, mismatched, 0.0));

    // The truncated series reproduces the value at tau = i.
    const QExpansion many = q_expansion(q, 60);
    std::vector<std::complex<double>> terms;
    for (const auto& t : many.terms) terms.push_back(t.coefficient.get_d() * std::exp(-2.0 * kPi * t.exponent.get_d()));
    const std::complex<double> series = std::polar(1.0, kPi * many.phase.get_d()) * pairwise_sum(terms);
    const ThetaValue direct = eval_theta(q, {1e-13});
    out.push_back(make_report("theta_qexp_matches_value", in, std::abs(series - direct.value), 1e-9));
    return out;
}

std::vector<CheckReport> check_theta_laws() {
    std::vector<CheckReport> out;
    const TruncationPolicy pol{1e-12};
    const Eigen::Vector2d lam(1, 2);
    for (KernelKind k : {KernelKind::holomorphic, KernelKind::completed}) {
        const ThetaSpec s = law_spec(k);
        const std::complex<double> base = eval_theta(s, pol).value;
        const Eigen::MatrixXd& a = s.form.matrix_d();
        const Eigen::VectorXd k0 = (to_eigen(s.mu) + 0.5 * to_eigen(s.p));
        const double blp = lam.dot(a * to_eigen(s.p));
        const double parity = std::fmod(std::fabs(std::round(blp)), 2.0) == 1.0 ? -1.0 : 1.0;

        ThetaSpec t = s;
        t.tau += 1.0;
        t.c_ell = s.c_ell + s.b;
        const std::complex<double> tv = eval_theta(t, pol).value;
        const std::complex<double> t_expect = std::polar(1.0, -kPi * s.form.quad(k0)) * base;

        ThetaSpec eb = s;
        eb.b = s.b + lam;
        const std::complex<double> bv = eval_theta(eb, pol).value;
        const std::complex<double> b_expect = parity * std::polar(1.0, -kPi * s.c_ell.dot(a * lam)) * base;

        ThetaSpec ec = s;
        ec.c_ell = s.c_ell + lam;
        const std::complex<double> cv = eval_theta(ec, pol).value;
        const std::complex<double> c_expect = parity * std::polar(1.0, kPi * lam.dot(a * s.b)) * base;

        const std::string in = std::string("rank1 diag(1,-1) ") + kernel_name(k);
        out.push_back(make_report(std::string("theta_T_law_") + kernel_name(k), in, std::abs(tv - t_expect), 1e-7));
        out.push_back(
            make_report(std::string("theta_elliptic_b_") + kernel_name(k), in, std::abs(bv - b_expect), 1e-7));
        out.push_back(
            make_report(std::string("theta_elliptic_c_") + kernel_name(k), in, std::abs(cv - c_expect), 1e-7));
    }
    return out;
}

SLawResult s_law_spot_check() {
    ThetaSpec s;
    s.form = BilinearForm::from_rows({{2, 0}, {0, -2}});
    s.pair.form = s.form;
    s.pair.c = RationalMatrix::from_rows({{1}, {0}});
    s.pair.c_prime = RationalMatrix::from_rows({{2}, {1}});
    s.p = {0, 0};
    s.kernel = KernelKind::completed;
    s.tau = {0.0, 1.0};
    const TruncationPolicy pol{1e-12};
    const std::vector<RationalVector> classes = discriminant_group(s.form);
    const double det = std::fabs(determinant(s.form.matrix()).get_d());
    const Eigen::MatrixXd& a = s.form.matrix_d();
    const int r = s.pair.rank();
    // i^{lambda + r} |D|^{-1/2} e^{pi i Q(p)/2}; tau = i makes the tau powers 1.
    const std::complex<double> pref = std::pow(std::complex<double>(0.0, 1.0), s.lambda + r) / std::sqrt(det) *
                                      std::polar(1.0, 0.5 * kPi * s.form.quad(to_eigen(s.p)));
    const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> points = {
        {{0.1, 0.23}, {0.3, -0.17}}, {{0.05, -0.4}, {-0.2, 0.33}}, {{0.37, 0.11}, {0.08, 0.26}}};

    std::vector<std::complex<double>> lhs, rhs;
    for (const auto& [b, c] : points) {
        std::vector<std::complex<double>> class_values;
        for (const auto& nu : classes) {
            ThetaSpec t = s;
            t.mu = nu;
            t.b = b;
            t.c_ell = c;
            class_values.push_back(eval_theta(t, pol).value);
        }
        for (const auto& mu : classes) {
            ThetaSpec t = s;
            t.mu = mu;
            t.b = c;
            t.c_ell = -b;
            lhs.push_back(eval_theta(t, pol).value);
            std::vector<std::complex<double>> terms;
            for (std::size_t j = 0; j < classes.size(); ++j)
                terms.push_back(std::polar(1.0, 2.0 * kPi * to_eigen(mu).dot(a * to_eigen(classes[j]))) *
                                class_values[j]);
            rhs.push_back(pref * pairwise_sum(terms));
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rhs.size(); ++i)
        if (std::abs(rhs[i]) > std::abs(rhs[best])) best = i;
    SLawResult out;
    out.factor = lhs[best] / rhs[best];
    out.n_classes = static_cast<int>(classes.size());
    for (std::size_t i = 0; i < lhs.size(); ++i)
        out.max_deviation = std::max(out.max_deviation, std::abs(lhs[i] - out.factor * rhs[i]));
    return out;
}

CheckReport check_s_law() {
    const SLawResult s = s_law_spot_check();
    const double residual = std::max(s.max_deviation, std::fabs(std::abs(s.factor) - 1.0));
    std::ostringstream d;
    d << std::setprecision(10) << "factor " << s.factor.real() << (s.factor.imag() < 0 ? "" : "+") << s.factor.imag()
      << "i over " << s.n_classes << " classes";
    return make_report("theta_S_law_completed", "diag(2,-2) p=0 tau=i", residual, 1e-4, d.str());
}

std::vector<CheckReport> run_suite(SuiteLevel level, std::uint64_t seed, double bound_rhs_scale) {
    const bool full = level == SuiteLevel::full;
    using Job = std::function<std::vector<CheckReport>()>;
    auto one = [](std::function<CheckReport()> f) -> Job { return [f] { return std::vector<CheckReport>{f()}; }; };
    const std::vector<std::pair<std::string, Job>> jobs = {
        {"errfn_rank1_closed_form", one([] { return check_closed_forms(); })},
        {"errfn_E_vs_monte_carlo",
         one([=] { return check_mc_oracle(seed, full ? 200 : 12, full ? 4'000'000 : 1'000'000); })},
        {"errfn_decompositions", [=] { return check_decompositions(seed, full ? 200 : 30); }},
        {"vigneras", [=] { return check_vigneras(seed, full ? 3 : 1); }},
        {"errfn_M_bound", one([=] { return check_m_bound(seed, full ? 10'000 : 1'000, bound_rhs_scale); })},
        {"errfn_discontinuity", [=] { return check_discontinuity(seed, full ? 50 : 10); }},
        {"sign_lemma_exact", one([=] { return check_sign_lemma(seed, full ? 1000 : 100, 5); })},
        {"sign_identity_frames", one([=] { return check_sign_identity(seed, full ? 100 : 20); })},
        {"boosted_shadow_perp_form", one([=] { return check_boosted_shadow(seed, full ? 30 : 6); })},
        {"cones_a4_example", one([] { return check_a4_example(); })},
        {"cones_cofactor_identity", [=] { return check_cofactor_identity(seed, full ? 100 : 20, full ? 20 : 5); }},
        {"theta_convergence", [] { return check_theta_convergence(); }},
        {"theta_laws", [] { return check_theta_laws(); }},
        {"theta_S_law_completed", one([] { return check_s_law(); })},
    };
    std::vector<std::vector<CheckReport>> results(jobs.size());
    parallel_chunks(jobs.size(), [&](std::size_t i) {
        try {
            results[i] = jobs[i].second();
        } catch (const std::exception& e) {
            results[i] = {make_report(jobs[i].first, "seed=" + std::to_string(seed), kInf, 0.0,
                                      std::string("error: ") + e.what())};
        }
    });
    std::vector<CheckReport> out;
    for (auto& r : results)
        for (auto& c : r) out.push_back(std::move(c));
    std::stable_sort(out.begin(), out.end(), [](const CheckReport& x, const CheckReport& y) { return x.name < y.name; });
    return out;
}

}  // namespace thetaforge
