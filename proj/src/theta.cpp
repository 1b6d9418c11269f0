#include "thetaforge/theta.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "thetaforge/parallel.hpp"

namespace thetaforge {

namespace {

constexpr double kPi = std::numbers::pi;

Rational floor_of(const Rational& x) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return Rational(f);
}

// x reduced to [0, m).
Rational reduce_mod(const Rational& x, const Rational& m) { return x - m * floor_of(x / m); }

RationalVector add(const RationalVector& a, const RationalVector& b) {
    RationalVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Eigen::VectorXd to_double(const RationalVector& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get_d();
    return out;
}

RationalVector half(const RationalVector& v) {
    RationalVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / 2;
    return out;
}

double min_generalized_eigenvalue(const Eigen::MatrixXd& f, const Eigen::MatrixXd& p) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (f + f.transpose()), p);
    return es.eigenvalues().minCoeff();
}

struct BudgetHit {};

// Precomputed per-spec data shared by value and expansion routines.
class Engine {
public:
    explicit Engine(const ThetaSpec& spec) : spec_(spec) {
        spec.validate();
        n_ = spec.dim();
        k_offset_ = add(spec.mu, half(spec.p));
        b_exact_.resize(n_);
        for (int i = 0; i < n_; ++i) b_exact_[i] = exact_from_double(spec.b(i));
        shift_ = to_double(k_offset_) + spec.b;
        const RationalVector ap = mat_vec(spec.form.matrix(), spec.p);
        for (const auto& v : ap) ap_.push_back(v.get_num().get_si());
        base_phase_ = reduce_mod(dot(k_offset_, ap), 2).get_d();
        tau1_ = spec.tau.real();
        tau2_ = spec.tau.imag();
        pref_ = std::pow(tau2_, -0.5 * spec.lambda);
        if (spec.kernel == KernelKind::holomorphic) {
            const RationalMatrix& a = spec.form.matrix();
            ac_exact_ = a * spec.pair.c;
            acp_exact_ = a * spec.pair.c_prime;
            ac_ = ac_exact_.to_double();
            acp_ = acp_exact_.to_double();
        } else if (spec.kernel == KernelKind::completed) {
            completed_ = std::make_unique<CompletedKernel>(spec.pair, spec.quad);
        }
    }

    const Eigen::VectorXd& shift() const { return shift_; }

    RationalVector exact_k(const std::vector<long>& nvec) const {
        RationalVector k = k_offset_;
        for (int i = 0; i < n_; ++i) k[i] += nvec[i];
        return k;
    }

    // Kernel at sqrt(2 tau2) x; `wall` reports a vanishing sign argument.
    double kernel(const std::vector<long>& nvec, const Eigen::VectorXd& x, bool& wall) const {
        wall = false;
        switch (spec_.kernel) {
            case KernelKind::holomorphic: return holomorphic(nvec, x, wall);
            case KernelKind::completed: return (*completed_)(std::sqrt(2.0 * tau2_) * x);
            case KernelKind::user: return spec_.user.phi(std::sqrt(2.0 * tau2_) * x);
        }
        return 0.0;
    }

    std::complex<double> term(const std::vector<long>& nvec, const Eigen::VectorXd& x, double phi) const {
        if (phi == 0.0) return 0.0;
        long bnp = 0;
        for (int i = 0; i < n_; ++i) bnp += nvec[i] * ap_[i];
        const double q = spec_.form.quad(x);
        const Eigen::VectorXd shifted = x - 0.5 * spec_.b;
        const double phase = kPi * ((bnp & 1L ? 1.0 : 0.0) + base_phase_) - kPi * tau1_ * q +
                             2.0 * kPi * spec_.form.pair(spec_.c_ell, shifted);
        const double mag = pref_ * phi * std::exp(kPi * tau2_ * q);
        return std::polar(mag, phase);
    }

    // Sign of B(c, k + b) with c given through A c; exact near zero.
    int sign_arg(const Eigen::VectorXd& acol, const RationalMatrix& aexact, int j, const std::vector<long>& nvec,
                 const Eigen::VectorXd& x) const {
        const double v = acol.dot(x);
        const double scale = acol.cwiseAbs().dot(x.cwiseAbs());
        if (std::fabs(v) > 1e-10 * scale) return v > 0 ? 1 : -1;
        const RationalVector xe = add(exact_k(nvec), b_exact_);
        Rational s = 0;
        for (int i = 0; i < n_; ++i) s += aexact(i, j) * xe[i];
        return sign_of(s);
    }

    double holomorphic(const std::vector<long>& nvec, const Eigen::VectorXd& x, bool& wall) const {
        const int r = spec_.pair.rank();
        double out = 1.0;
        for (int j = 0; j < r; ++j) {
            const int s1 = sign_arg(ac_.col(j), ac_exact_, j, nvec, x);
            const int s2 = sign_arg(acp_.col(j), acp_exact_, j, nvec, x);
            if (s1 == 0 || s2 == 0) wall = true;
            out *= 0.5 * (s1 - s2);
        }
        return out;
    }

private:
    const ThetaSpec& spec_;
    int n_ = 0;
    RationalVector k_offset_, b_exact_;
    Eigen::VectorXd shift_;
    std::vector<long> ap_;
    double base_phase_ = 0.0;
    double tau1_ = 0.0, tau2_ = 1.0, pref_ = 1.0;
    RationalMatrix ac_exact_, acp_exact_;
    Eigen::MatrixXd ac_, acp_;
    std::unique_ptr<CompletedKernel> completed_;
};

struct ShellSum {
    std::complex<double> value;
    double abs_sum = 0.0;
    std::int64_t count = 0;
};

// Terms over the shell lo2 < P_+(k+b) <= hi2.
ShellSum sum_shell(const Engine& engine, const Eigen::MatrixXd& p_plus, double lo2, double hi2,
                   std::int64_t budget, std::vector<RationalVector>& wall_hits) {
    std::vector<std::vector<long>> ns;
    std::vector<Eigen::VectorXd> xs;
    try {
        enumerate_ellipsoid(p_plus, engine.shift(), lo2, hi2,
                            [&](const std::vector<long>& n, const Eigen::VectorXd& x, double) {
                                if (static_cast<std::int64_t>(ns.size()) >= budget) throw BudgetHit{};
                                ns.push_back(n);
                                xs.push_back(x);
                            });
    } catch (const BudgetHit&) {
        throw;
    }
    const std::size_t m = ns.size();
    std::vector<std::complex<double>> terms(m);
    std::vector<double> abs_terms(m);
    std::vector<char> walls(m, 0);
    constexpr std::size_t kChunk = 256;
    parallel_chunks((m + kChunk - 1) / kChunk, [&](std::size_t c) {
        const std::size_t end = std::min(m, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            bool wall = false;
            const double phi = engine.kernel(ns[i], xs[i], wall);
            walls[i] = wall;
            terms[i] = engine.term(ns[i], xs[i], phi);
            abs_terms[i] = std::abs(terms[i]);
        }
    });
    for (std::size_t i = 0; i < m; ++i)
        if (walls[i] && wall_hits.size() < 1000) wall_hits.push_back(engine.exact_k(ns[i]));
    return {pairwise_sum(terms), pairwise_sum(abs_terms), static_cast<std::int64_t>(m)};
}

double delta_of(const Eigen::MatrixXd& p_plus) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < p_plus.rows(); ++i) d += std::sqrt(p_plus(i, i));
    return 0.5 * d;
}

}  // namespace

void ThetaSpec::validate() const {
    const int n = dim();
    if (n == 0) throw ValidationError("theta spec needs a bilinear form");
    if (static_cast<int>(mu.size()) != n || static_cast<int>(p.size()) != n || b.size() != n || c_ell.size() != n)
        throw ValidationError("mu, p, b and c must have the form's dimension");
    if (!(tau.imag() > 0.0) || !std::isfinite(tau.real())) throw ValidationError("tau must lie in the upper half plane");
    if (!b.allFinite() || !c_ell.allFinite()) throw ValidationError("b and c must be finite");
    for (const auto& v : p)
        if (v.get_den() != 1) throw ValidationError("characteristic vector must be integral");
    const RationalMatrix& a = form.matrix();
    const RationalVector ap = mat_vec(a, p);
    for (int i = 0; i < n; ++i) {
        const Rational v = a(i, i) + ap[i];
        if (v.get_den() != 1 || v.get_num() % 2 != 0)
            throw ValidationError("p is not characteristic: Q(e_i) + B(e_i, p) must be even");
    }
    const RationalVector amu = mat_vec(a, mu);
    for (const auto& v : amu)
        if (v.get_den() != 1) throw ValidationError("mu is not in the dual lattice");
    if (kernel == KernelKind::user) {
        if (!user.phi) throw ValidationError("user kernel needs a function");
        if (user.decay_form.rows() != n || user.decay_form.cols() != n)
            throw ValidationError("user kernel decay form has the wrong size");
        return;
    }
    if (lambda != 0) throw ValidationError("cone kernels have lambda = 0");
    if (pair.dim() != n) throw ValidationError("cone pair lives in a different dimension");
    if (!(pair.form.matrix() == a)) throw ValidationError("cone pair uses a different bilinear form");
    const ConeCheck check = check_cone_pair(pair);
    if (!check.pass) throw ValidationError("cone pair fails the hypotheses: " + check.first_failed);
}

void TruncationPolicy::validate() const {
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    if (max_points < 1) throw ValidationError("max_points must be positive");
    if (initial_radius < 0.0) throw ValidationError("initial_radius must be non-negative");
}

Rational kernel_phi(const ConePair& pair, const RationalVector& x) {
    const RationalVector ax = mat_vec(pair.form.matrix(), x);
    Rational out = 1;
    for (int j = 0; j < pair.rank(); ++j) {
        const int s1 = sign_of(dot(pair.c.column(j), ax));
        const int s2 = sign_of(dot(pair.c_prime.column(j), ax));
        out *= Rational(s1 - s2, 2);
    }
    out.canonicalize();
    return out;
}

double kernel_phi(const ConePair& pair, const Eigen::VectorXd& x) {
    const Eigen::VectorXd ax = pair.form.matrix_d() * x;
    const Eigen::MatrixXd c = pair.c.to_double();
    const Eigen::MatrixXd cp = pair.c_prime.to_double();
    double out = 1.0;
    auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    for (int j = 0; j < pair.rank(); ++j) out *= 0.5 * (sgn(c.col(j).dot(ax)) - sgn(cp.col(j).dot(ax)));
    return out;
}

CompletedKernel::CompletedKernel(const ConePair& pair, QuadratureSpec quad) : r_(pair.rank()) {
    for (IndexSet p : subsets_of_range(r_))
        parts_.emplace_back(build_cone(pair.mixed(p).to_double(), pair.form), quad);
}

double CompletedKernel::operator()(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (std::size_t mask = 0; mask < parts_.size(); ++mask) {
        const int size = std::popcount(static_cast<unsigned>(mask));
        const double sign = (r_ - size) % 2 ? -1.0 : 1.0;
        total += sign * parts_[mask].error(x).value;
    }
    return std::ldexp(total, -r_);
}

double kernel_phi_hat(const ConePair& pair, const Eigen::VectorXd& x, const QuadratureSpec& quad) {
    return CompletedKernel(pair, quad)(x);
}

Eigen::MatrixXd majorant(const BilinearForm& form) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.matrix_d());
    const Eigen::MatrixXd& v = es.eigenvectors();
    return v * es.eigenvalues().cwiseAbs().asDiagonal() * v.transpose();
}

void enumerate_ellipsoid(const Eigen::MatrixXd& p_plus, const Eigen::VectorXd& shift, double lo2, double hi2,
                         const std::function<void(const std::vector<long>&, const Eigen::VectorXd&, double)>& visit) {
    const int n = static_cast<int>(p_plus.rows());
    if (!(hi2 >= 0.0)) return;
    Eigen::LLT<Eigen::MatrixXd> llt(p_plus);
    if (llt.info() != Eigen::Success) throw ValidationError("majorant is not positive definite");
    const Eigen::MatrixXd u = llt.matrixU();
    // Inflated search radius; membership is decided on the directly computed norm.
    const double search2 = hi2 * (1.0 + 1e-12) + 1e-12;
    std::vector<long> nvec(n, 0);
    Eigen::VectorXd y(n);
    std::function<void(int, double)> rec = [&](int i, double rem) {
        double t = 0.0;
        for (int j = i + 1; j < n; ++j) t += u(i, j) * y(j);
        const double w = std::sqrt(std::max(rem, 0.0)) / u(i, i);
        const double centre = -t / u(i, i);
        const long lo = static_cast<long>(std::ceil(centre - w - shift(i)));
        const long hi = static_cast<long>(std::floor(centre + w - shift(i)));
        for (long k = lo; k <= hi; ++k) {
            nvec[i] = k;
            y(i) = static_cast<double>(k) + shift(i);
            const double z = u(i, i) * y(i) + t;
            const double next = rem - z * z;
            if (next < -1e-12 * (search2 + 1.0)) continue;
            if (i == 0) {
                const double norm2 = y.dot(p_plus * y);
                if (norm2 > lo2 && norm2 <= hi2) visit(nvec, y, norm2);
            } else {
                rec(i - 1, next);
            }
        }
    };
    rec(n - 1, search2);
}

std::vector<LatticePoint> enumerate_lattice(const ThetaSpec& spec, double radius) {
    const Eigen::VectorXd shift = to_double(add(spec.mu, half(spec.p))) + spec.b;
    std::vector<LatticePoint> out;
    enumerate_ellipsoid(majorant(spec.form), shift, -1.0, radius * radius,
                        [&](const std::vector<long>& n, const Eigen::VectorXd& x, double norm2) {
                            out.push_back({n, x, norm2});
                        });
    return out;
}

DecayBound decay_bound(const ThetaSpec& spec) {
    DecayBound out;
    out.p_plus = majorant(spec.form);
    const int n = spec.dim();
    switch (spec.kernel) {
        case KernelKind::holomorphic: {
            const Eigen::MatrixXd qm = q_minus_form(spec.pair).to_double();
            out.gamma = min_generalized_eigenvalue(-qm, out.p_plus);
            out.constant = 1.0;
            break;
        }
        case KernelKind::completed: {
            const ConePair& pair = spec.pair;
            const int r = pair.rank();
            const Eigen::MatrixXd a = spec.form.matrix_d();
            const ConeCheck check = check_cone_pair(pair);
            out.gamma = std::numeric_limits<double>::infinity();
            out.constant = 0.0;
            for (IndexSet s : subsets_of_range(r))
                for (IndexSet p : subsets_of(s)) {
                    Eigen::MatrixXd qm = a;
                    if (!s.empty()) {
                        if (s != IndexSet::full(r)) {
                            const auto [c, cp] = projected_system(pair, s, p);
                            qm = q_minus_form(c, cp, spec.form).to_double();
                        }
                    } else {
                        qm = check.top.q_minus.to_double();
                    }
                    Eigen::MatrixXd pi1 = Eigen::MatrixXd::Zero(n, n);
                    if (!s.empty()) {
                        const Eigen::MatrixXd basis = pair.mixed(p).select_columns(s.indices()).to_double();
                        const Eigen::MatrixXd gram = basis.transpose() * a * basis;
                        pi1 = basis * gram.ldlt().solve(basis.transpose() * a);
                    }
                    const Eigen::MatrixXd pi2 = Eigen::MatrixXd::Identity(n, n) - pi1;
                    const Eigen::MatrixXd f = pi1.transpose() * a * pi1 - pi2.transpose() * qm * pi2;
                    out.gamma = std::min(out.gamma, min_generalized_eigenvalue(f, out.p_plus));
                    double fact = 1.0;
                    for (int k = 2; k <= s.size(); ++k) fact *= k;
                    out.constant += std::ldexp(fact, -s.size());
                }
            break;
        }
        case KernelKind::user:
            out.gamma = min_generalized_eigenvalue(spec.user.decay_form, out.p_plus);
            out.constant = spec.user.constant;
            break;
    }
    if (out.constant > 0.0 && !(out.gamma > 0.0)) throw ValidationError("kernel decay form is not positive definite");
    return out;
}

double tail_bound(const ThetaSpec& spec, const DecayBound& decay, double radius) {
    if (decay.constant == 0.0) return 0.0;
    const int n = spec.dim();
    const double tau2 = spec.tau.imag();
    const double alpha = kPi * tau2 * decay.gamma;
    const double delta = delta_of(decay.p_plus);
    const double a = radius - 2.0 * delta;
    if (a < 0.0) return std::numeric_limits<double>::infinity();
    const double sphere = 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
    double integral = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= n - 1; ++k) {
        const double s = 0.5 * (k + 1);
        const double ik = 0.5 * std::pow(alpha, -s) * boost::math::tgamma(s, alpha * a * a);
        integral += binom * std::pow(delta, n - 1 - k) * ik;
        binom = binom * (n - 1 - k) / (k + 1);
    }
    const double pref = std::pow(tau2, -0.5 * spec.lambda) * decay.constant;
    return pref * sphere / std::sqrt(decay.p_plus.determinant()) * integral;
}

ThetaValue eval_theta(const ThetaSpec& spec, const TruncationPolicy& policy) {
    policy.validate();
    const Engine engine(spec);
    const DecayBound decay = decay_bound(spec);
    double radius = policy.initial_radius > 0.0 ? policy.initial_radius : 2.0 * delta_of(decay.p_plus) + 1.0;
    ThetaValue out;
    std::vector<std::complex<double>> shells;
    std::vector<double> abs_shells;
    double lo2 = -1.0;
    while (true) {
        ShellSum shell;
        try {
            shell = sum_shell(engine, decay.p_plus, lo2, radius * radius, policy.max_points - out.n_points,
                              out.wall_hits);
        } catch (const BudgetHit&) {
            out.value = pairwise_sum(shells);
            out.abs_sum = pairwise_sum(abs_shells);
            out.tail_estimate = lo2 > 0.0 ? tail_bound(spec, decay, std::sqrt(lo2)) : std::numeric_limits<double>::infinity();
            out.partial = true;
            throw BudgetExceeded("point budget exhausted before the tail bound reached tol", out);
        }
        shells.push_back(shell.value);
        abs_shells.push_back(shell.abs_sum);
        out.n_points += shell.count;
        out.radius = radius;
        out.tail_estimate = tail_bound(spec, decay, radius);
        if (out.tail_estimate <= policy.tol) break;
        lo2 = radius * radius;
        radius *= 2.0;
    }
    out.value = pairwise_sum(shells);
    out.abs_sum = pairwise_sum(abs_shells);
    return out;
}

ThetaValue eval_theta_at_radius(const ThetaSpec& spec, double radius) {
    const Engine engine(spec);
    const DecayBound decay = decay_bound(spec);
    ThetaValue out;
    const ShellSum shell =
        sum_shell(engine, decay.p_plus, -1.0, radius * radius, std::numeric_limits<std::int64_t>::max(), out.wall_hits);
    out.value = shell.value;
    out.abs_sum = shell.abs_sum;
    out.n_points = shell.count;
    out.radius = radius;
    out.tail_estimate = tail_bound(spec, decay, radius);
    return out;
}

QExpansion q_expansion(const ThetaSpec& spec, int n_terms, const TruncationPolicy& policy, double radius_factor) {
    policy.validate();
    if (n_terms < 1) throw ValidationError("n_terms must be positive");
    if (spec.kernel != KernelKind::holomorphic) throw ValidationError("q-expansion needs the holomorphic kernel");
    if (!spec.b.isZero() || !spec.c_ell.isZero()) throw ValidationError("q-expansion needs b = c = 0");
    if (!(radius_factor >= 1.0)) throw ValidationError("radius_factor must be at least 1");
    const Engine engine(spec);
    const DecayBound decay = decay_bound(spec);
    const RationalMatrix& a = spec.form.matrix();
    QExpansion out;
    out.phase = reduce_mod(dot(spec.mu, mat_vec(a, spec.p)) + dot(spec.p, mat_vec(a, spec.p)) / 2, 2);

    // On the support Q(k) <= Q_-(k) <= -gamma P_+(k), so exponents up to e
    // are complete once P_+(k) <= 2e/gamma is covered.
    const double gamma = decay.gamma * (1.0 - 1e-9);
    const RationalVector ap = mat_vec(a, spec.p);
    const RationalMatrix qm = q_minus_form(spec.pair);
    Rational e_max = 1;
    while (true) {
        const double radius = std::sqrt(2.0 * e_max.get_d() / gamma) * radius_factor;
        std::map<Rational, std::pair<Rational, bool>> coeffs;
        std::int64_t count = 0;
        try {
            enumerate_ellipsoid(decay.p_plus, engine.shift(), -1.0, radius * radius,
                                [&](const std::vector<long>& n, const Eigen::VectorXd& x, double) {
                                    if (++count > policy.max_points) throw BudgetHit{};
                                    bool wall = false;
                                    const double phi = engine.kernel(n, x, wall);
                                    if (phi == 0.0 && !wall) return;
                                    const RationalVector k = engine.exact_k(n);
                                    const Rational qk = dot(k, mat_vec(a, k));
                                    if (phi != 0.0 && dot(k, mat_vec(qm, k)) < qk)
                                        throw Error("support point with Q_-(k) < Q(k)");
                                    const Rational expo = -qk / 2;
                                    if (expo > e_max) return;
                                    Rational bnp = 0;
                                    for (std::size_t i = 0; i < n.size(); ++i) bnp += Rational(mpz_class(n[i])) * ap[i];
                                    const int parity = static_cast<int>(mpz_class(bnp.get_num() % 2).get_si());
                                    const Rational value = kernel_phi(spec.pair, k) * (parity ? -1 : 1);
                                    auto& slot = coeffs[expo];
                                    slot.first += value;
                                    slot.second = slot.second || wall;
                                });
        } catch (const BudgetHit&) {
            throw BudgetExceeded("point budget exhausted during q-expansion", ThetaValue{});
        }
        out.terms.clear();
        for (const auto& [expo, cw] : coeffs)
            if (cw.first != 0) out.terms.push_back({expo, cw.first, cw.second});
        out.radius = radius;
        out.n_points = count;
        out.complete_below = e_max;
        if (static_cast<int>(out.terms.size()) >= n_terms) {
            out.terms.resize(n_terms);
            return out;
        }
        e_max *= 2;
    }
}

std::vector<RationalVector> discriminant_group(const BilinearForm& form) {
    const RationalMatrix ainv = inverse(form.matrix());
    const std::size_t n = ainv.rows();
    auto reduce = [](RationalVector v) {
        for (auto& x : v) x = reduce_mod(x, 1);
        return v;
    };
    std::vector<RationalVector> out{RationalVector(n, Rational(0))};
    std::map<RationalVector, bool> seen{{out[0], true}};
    for (std::size_t head = 0; head < out.size(); ++head)
        for (std::size_t j = 0; j < n; ++j) {
            const RationalVector next = reduce(add(out[head], ainv.column(j)));
            if (seen.emplace(next, true).second) out.push_back(next);
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace thetaforge
