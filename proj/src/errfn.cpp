#include "thetaforge/errfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "thetaforge/errors.hpp"
#include "thetaforge/parallel.hpp"
#include "thetaforge/quadrature.hpp"

namespace thetaforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.772453850905516027298;
constexpr int kMaxRank = 8;
// Radial integrals are cut where the Gaussian factor has dropped by e^{-kTail}
// relative to its value at t = 1.
constexpr double kTail = 46.0;

using Vec = std::array<double, kMaxRank>;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Vec to_vec(const Eigen::VectorXd& v) {
    Vec out{};
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
    return out;
}

double dotn(const Vec& a, const double* v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * v[i];
    return s;
}

// Projector tree of one frame. Node j's child is the frame P_{[r]/j} M_{[r]/j}
// with P rows spanning the duals other than w_j (the complement of m_j).
struct RadialNode {
    int r = 0;
    std::vector<Vec> mhat;             // unit columns of M
    std::vector<std::vector<Vec>> proj; // proj[j]: r-1 rows of length r
    std::vector<RadialNode> child;
};

RadialNode build_tree(const Eigen::MatrixXd& m) {
    RadialNode node;
    node.r = static_cast<int>(m.cols());
    if (node.r == 0) return node;
    const Eigen::MatrixXd w = m.inverse().transpose();
    for (int j = 0; j < node.r; ++j) node.mhat.push_back(to_vec(m.col(j).normalized()));
    if (node.r == 1) return node;
    const IndexSet full = IndexSet::full(node.r);
    for (int j = 0; j < node.r; ++j) {
        const IndexSet rest = full.without(j);
        const Eigen::MatrixXd p = orthonormal_rows(select_columns(w, rest));
        std::vector<Vec> rows;
        for (Eigen::Index k = 0; k < p.rows(); ++k) rows.push_back(to_vec(p.row(k).transpose()));
        node.proj.push_back(std::move(rows));
        node.child.push_back(build_tree(p * select_columns(m, rest)));
    }
    return node;
}

// M_r(v) = -2 sum_j a_j int_1^inf exp(-pi t^2 a_j^2) M_{r-1}(child_j; t P_j v) dt,
// a_j = m^_j . v, integrated in s = ln t by Gauss-Legendre. Rays from a
// point off the walls never meet a wall, in the node or in its children.
double m_value(const RadialNode& n, const double* v, const QuadratureRule& rule) {
    if (n.r == 0) return 1.0;
    if (n.r == 1) {
        const double a = n.mhat[0][0] * v[0];
        return -sgn(a) * std::erfc(kSqrtPi * std::fabs(a));
    }
    double norm2 = 0.0;
    for (int i = 0; i < n.r; ++i) norm2 += v[i] * v[i];
    if (norm2 == 0.0) return 0.0;
    const double half = 0.25 * std::log1p(kTail / (kPi * norm2));
    const int rc = n.r - 1;
    double total = 0.0;
    for (int j = 0; j < n.r; ++j) {
        const double a = dotn(n.mhat[j], v, n.r);
        if (a == 0.0) continue;
        Vec pv{}, scaled{};
        for (int k = 0; k < rc; ++k) pv[k] = dotn(n.proj[j][k], v, n.r);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = std::exp(half * (rule.nodes[q] + 1.0));
            for (int k = 0; k < rc; ++k) scaled[k] = t * pv[k];
            acc += rule.weights[q] * t * std::exp(-kPi * t * t * a * a) * m_value(n.child[j], scaled.data(), rule);
        }
        total += a * acc * half;
    }
    return -2.0 * total;
}

// E_r(v) = sign(M^T v) - 2 sum_j a_j int_1^inf exp(-pi t^2 a_j^2) E_{r-1}(child_j; t P_j v) dt.
double e_value_radial(const RadialNode& n, const double* v, const QuadratureRule& rule) {
    if (n.r == 0) return 1.0;
    if (n.r == 1) return std::erf(kSqrtPi * n.mhat[0][0] * v[0]);
    const int rc = n.r - 1;
    double sign_product = 1.0;
    double total = 0.0;
    for (int j = 0; j < n.r; ++j) {
        const double a = dotn(n.mhat[j], v, n.r);
        if (a == 0.0) throw WallTooClose("radial E route needs every m^_j . u nonzero");
        sign_product *= sgn(a);
        const double half = 0.25 * std::log1p(kTail / (kPi * a * a));
        Vec pv{}, scaled{};
        for (int k = 0; k < rc; ++k) pv[k] = dotn(n.proj[j][k], v, n.r);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = std::exp(half * (rule.nodes[q] + 1.0));
            for (int k = 0; k < rc; ++k) scaled[k] = t * pv[k];
            acc += rule.weights[q] * t * std::exp(-kPi * t * t * a * a) *
                   e_value_radial(n.child[j], scaled.data(), rule);
        }
        total += a * acc * half;
    }
    return sign_product - 2.0 * total;
}

// Tensor Gauss-Hermite on the shifted contour z = t - iu.
std::complex<double> m_gauss_hermite(const ErrorFunctionFrame& f, const Eigen::VectorXd& u, int n_nodes) {
    const int r = f.rank();
    const QuadratureRule& rule = gauss_hermite(n_nodes);
    const double inv_sqrt_pi = 1.0 / kSqrtPi;
    Eigen::VectorXd wu = f.w.transpose() * u;
    // Per axis contributions w_j . x / sqrt(pi) are accumulated incrementally.
    std::vector<int> idx(r, 0);
    std::vector<double> terms;
    std::vector<double> terms_im;
    const std::size_t total = static_cast<std::size_t>(std::pow(static_cast<double>(n_nodes), r));
    terms.reserve(total);
    terms_im.reserve(total);
    Eigen::VectorXd x(r);
    while (true) {
        double weight = 1.0;
        for (int i = 0; i < r; ++i) {
            x(i) = rule.nodes[idx[i]] * inv_sqrt_pi;
            weight *= rule.weights[idx[i]];
        }
        std::complex<double> denom = 1.0;
        for (int j = 0; j < r; ++j) denom *= std::complex<double>(f.w.col(j).dot(x), -wu(j));
        const std::complex<double> term = weight / denom;
        terms.push_back(term.real());
        terms_im.push_back(term.imag());
        int k = 0;
        while (k < r && ++idx[k] == n_nodes) idx[k++] = 0;
        if (k == r) break;
    }
    std::complex<double> sum(pairwise_sum(terms), pairwise_sum(terms_im));
    const std::complex<double> i_over_pi(0.0, 1.0 / kPi);
    std::complex<double> pref = std::pow(i_over_pi, r) / std::fabs(f.m.determinant());
    pref *= std::exp(-kPi * u.squaredNorm()) * std::pow(kPi, -0.5 * r);
    return pref * sum;
}

// Deterministic, well spread unit directions for the near-wall interpolation.
Eigen::VectorXd probe_direction(int r, int attempt) {
    Eigen::VectorXd d(r);
    std::uint64_t state = 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt + 1) + static_cast<std::uint64_t>(r);
    for (int i = 0; i < r; ++i) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        d(i) = static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    return d.normalized();
}

}  // namespace

void QuadratureSpec::validate() const {
    if (nodes_per_axis < 8) throw ValidationError("nodes_per_axis must be at least 8");
    if (max_r_direct < 1 || max_r_direct > 6) throw ValidationError("max_r_direct must lie in 1..6");
}

double wall_eps(const Eigen::VectorXd& u) { return std::max(1e-9 * u.norm(), 1e-12); }

struct SubsetTerm {
    IndexSet s;
    std::vector<Vec> sign_dirs;  // normalised P^T P m_k for k outside S
    Eigen::MatrixXd q;           // |S| x r
    std::vector<Vec> wall_dirs;  // normalised Q^T Q w_k for k in S
    RadialNode tree;
};

struct ErrorFunction::Impl {
    ErrorFunctionFrame frame;
    QuadratureSpec quad;
    std::vector<Vec> what;  // unit duals
    RadialNode root;
    std::vector<SubsetTerm> terms;

    double m_at(const Eigen::VectorXd& u, int nodes) const {
        const Vec v = to_vec(u);
        return m_value(root, v.data(), gauss_legendre(nodes));
    }

    double term_margin(const SubsetTerm& t, const Vec& v) const {
        const int r = frame.rank();
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& g : t.sign_dirs) margin = std::min(margin, std::fabs(dotn(g, v.data(), r)));
        for (const auto& h : t.wall_dirs) margin = std::min(margin, std::fabs(dotn(h, v.data(), r)));
        return margin;
    }

    double margin(const Eigen::VectorXd& u) const {
        const Vec v = to_vec(u);
        double out = std::numeric_limits<double>::infinity();
        for (const auto& t : terms) out = std::min(out, term_margin(t, v));
        return out;
    }

    // Decomposition sum at a point off every term wall; returns (value, est).
    std::pair<double, double> e_decomposed(const Eigen::VectorXd& u) const {
        const int r = frame.rank();
        const Vec v = to_vec(u);
        const QuadratureRule& fine = gauss_legendre(quad.nodes_per_axis);
        const QuadratureRule& coarse = gauss_legendre(quad.nodes_per_axis / 2);
        double value = 0.0, est = 0.0;
        for (const auto& t : terms) {
            double sign = 1.0;
            for (const auto& g : t.sign_dirs) sign *= sgn(dotn(g, v.data(), r));
            if (sign == 0.0) continue;
            Vec qu{};
            for (Eigen::Index k = 0; k < t.q.rows(); ++k) qu[k] = t.q.row(k).dot(u);
            const double mf = m_value(t.tree, qu.data(), fine);
            value += sign * mf;
            if (t.tree.r >= 2) est += std::fabs(mf - m_value(t.tree, qu.data(), coarse));
        }
        return {value, est};
    }
};

ErrorFunction::ErrorFunction(const ErrorFunctionFrame& frame, QuadratureSpec quad) : impl_(std::make_unique<Impl>()) {
    quad.validate();
    const int r = frame.rank();
    if (r < 1 || r > kMaxRank) throw RankTooLarge("frame rank must lie in 1.." + std::to_string(kMaxRank));
    if (frame.m.rows() != r || frame.w.rows() != r || frame.w.cols() != r)
        throw ValidationError("frame must be square with a matching dual");
    impl_->frame = frame;
    impl_->quad = quad;
    for (int j = 0; j < r; ++j) impl_->what.push_back(to_vec(frame.w.col(j).normalized()));
    impl_->root = build_tree(frame.m);

    const IndexSet full = IndexSet::full(r);
    for (IndexSet s : subsets_of_range(r)) {
        SubsetTerm t;
        t.s = s;
        const IndexSet rest = s.complement(r);
        if (!rest.empty()) {
            Eigen::MatrixXd p = rest == full ? Eigen::MatrixXd::Identity(r, r)
                                             : orthonormal_rows(select_columns(frame.w, rest));
            const Eigen::MatrixXd proj = p.transpose() * p;
            for (int k : rest.indices()) t.sign_dirs.push_back(to_vec((proj * frame.m.col(k)).normalized()));
        }
        if (s.empty()) {
            t.q = Eigen::MatrixXd(0, r);
        } else {
            t.q = s == full ? Eigen::MatrixXd::Identity(r, r) : orthonormal_rows(select_columns(frame.m, s));
            const Eigen::MatrixXd proj = t.q.transpose() * t.q;
            for (int k : s.indices()) t.wall_dirs.push_back(to_vec((proj * frame.w.col(k)).normalized()));
        }
        t.tree = s == full ? impl_->root : build_tree(t.q * select_columns(frame.m, s));
        impl_->terms.push_back(std::move(t));
    }
}

ErrorFunction::~ErrorFunction() = default;
ErrorFunction::ErrorFunction(ErrorFunction&&) noexcept = default;
ErrorFunction& ErrorFunction::operator=(ErrorFunction&&) noexcept = default;

int ErrorFunction::rank() const { return impl_->frame.rank(); }
const ErrorFunctionFrame& ErrorFunction::frame() const { return impl_->frame; }
const QuadratureSpec& ErrorFunction::quadrature() const { return impl_->quad; }

double ErrorFunction::wall_distance(const Eigen::VectorXd& u) const {
    const Vec v = to_vec(u);
    double out = std::numeric_limits<double>::infinity();
    for (const auto& w : impl_->what) out = std::min(out, std::fabs(dotn(w, v.data(), rank())));
    return out;
}

double ErrorFunction::decomposition_margin(const Eigen::VectorXd& u) const { return impl_->margin(u); }

ErrFnValue ErrorFunction::complementary(const Eigen::VectorXd& u) const {
    const int r = rank();
    if (u.size() != r) throw ValidationError("argument length does not match frame rank");
    if (!u.allFinite()) throw ValidationError("argument has non-finite entries");
    if (r > impl_->quad.max_r_direct) throw RankTooLarge("rank exceeds max_r_direct");
    if (wall_distance(u) < wall_eps(u)) throw WallTooClose("argument lies within wall_eps of a wall");
    const int n = impl_->quad.nodes_per_axis;
    ErrFnValue out;
    if (impl_->quad.scheme == QuadratureSpec::Scheme::gauss_hermite) {
        const std::complex<double> fine = m_gauss_hermite(impl_->frame, u, n);
        const std::complex<double> coarse = m_gauss_hermite(impl_->frame, u, n / 2);
        out.value = fine.real();
        out.imag_residual = fine.imag();
        out.est_error = std::abs(fine - coarse);
        return out;
    }
    out.value = impl_->m_at(u, n);
    if (r >= 2) out.est_error = std::fabs(out.value - impl_->m_at(u, n / 2));
    return out;
}

ErrFnValue ErrorFunction::error(const Eigen::VectorXd& u) const {
    const int r = rank();
    if (u.size() != r) throw ValidationError("argument length does not match frame rank");
    if (!u.allFinite()) throw ValidationError("argument has non-finite entries");
    if (r > impl_->quad.max_r_direct) throw RankTooLarge("rank exceeds max_r_direct");
    ErrFnValue out;
    if (impl_->margin(u) >= wall_eps(u)) {
        const auto [value, est] = impl_->e_decomposed(u);
        out.value = value;
        out.est_error = est;
        return out;
    }
    // E is smooth across the walls of the individual terms: interpolate from
    // four generic points on a line through u.
    const double delta = 2.5e-4;
    for (int attempt = 0; attempt < 32; ++attempt) {
        const Eigen::VectorXd d = probe_direction(r, attempt);
        const std::array<double, 4> offsets{-2.0, -1.0, 1.0, 2.0};
        const std::array<double, 4> weights{-1.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0, -1.0 / 6.0};
        bool generic = true;
        for (double o : offsets) {
            const Eigen::VectorXd p = u + o * delta * d;
            if (impl_->margin(p) < 1e-8) generic = false;
        }
        if (!generic) continue;
        std::array<double, 4> vals{};
        double est = 0.0;
        for (int k = 0; k < 4; ++k) {
            const auto [value, e] = impl_->e_decomposed(u + offsets[k] * delta * d);
            vals[k] = value;
            est += std::fabs(weights[k]) * e;
        }
        double value = 0.0;
        for (int k = 0; k < 4; ++k) value += weights[k] * vals[k];
        const double two_point = 0.5 * (vals[1] + vals[2]);
        out.value = value;
        out.est_error = est + std::fabs(value - two_point) * delta * delta;
        return out;
    }
    throw GenericityViolated("no generic interpolation line found near the argument");
}

ErrFnValue ErrorFunction::error_radial(const Eigen::VectorXd& u) const {
    const int r = rank();
    if (u.size() != r) throw ValidationError("argument length does not match frame rank");
    const Vec v = to_vec(u);
    const int n = impl_->quad.nodes_per_axis;
    ErrFnValue out;
    out.value = e_value_radial(impl_->root, v.data(), gauss_legendre(n));
    out.est_error = std::fabs(out.value - e_value_radial(impl_->root, v.data(), gauss_legendre(n / 2)));
    return out;
}

ErrFnValue eval_M(const ErrFnArgument& arg, const QuadratureSpec& quad) {
    if (arg.frame.rank() > quad.max_r_direct) throw RankTooLarge("rank exceeds max_r_direct");
    return ErrorFunction(arg.frame, quad).complementary(arg.u);
}

ErrFnValue eval_E(const ErrFnArgument& arg, const QuadratureSpec& quad) {
    if (arg.frame.rank() > quad.max_r_direct) throw RankTooLarge("rank exceeds max_r_direct");
    return ErrorFunction(arg.frame, quad).error(arg.u);
}

ErrFnValue eval_E_oracle_mc(const ErrFnArgument& arg, std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("n_samples must be positive");
    const int r = arg.frame.rank();
    if (arg.u.size() != r) throw ValidationError("argument length does not match frame rank");
    constexpr std::int64_t kChunk = 1 << 16;
    const std::size_t n_chunks = static_cast<std::size_t>((n_samples + kChunk - 1) / kChunk);
    // Integer tallies per chunk make the result independent of scheduling.
    std::vector<std::int64_t> tallies(n_chunks, 0);
    const Eigen::MatrixXd mt = arg.frame.m.transpose();
    const double sigma = 1.0 / std::sqrt(2.0 * kPi);
    parallel_chunks(n_chunks, [&](std::size_t c) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> normal(0.0, sigma);
        const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
        const std::int64_t end = std::min(n_samples, begin + kChunk);
        Eigen::VectorXd x(r), y(r);
        std::int64_t tally = 0;
        for (std::int64_t i = begin; i < end; ++i) {
            for (int k = 0; k < r; ++k) x(k) = arg.u(k) + normal(gen);
            y.noalias() = mt * x;
            int s = 1;
            for (int k = 0; k < r; ++k) s *= y(k) > 0.0 ? 1 : (y(k) < 0.0 ? -1 : 0);
            tally += s;
        }
        tallies[c] = tally;
    });
    std::int64_t tally = 0;
    for (auto t : tallies) tally += t;
    const double n = static_cast<double>(n_samples);
    const double mean = static_cast<double>(tally) / n;
    // Samples are +-1 (zero has probability zero), so the variance is 1 - mean^2.
    const double var = std::max(0.0, 1.0 - mean * mean) * n / std::max(1.0, n - 1.0);
    return {mean, 0.0, std::sqrt(var / n)};
}

ErrorFunctionFrame reduced_frame(const ErrorFunctionFrame& frame, int j) {
    const int r = frame.rank();
    if (j < 0 || j >= r) throw ValidationError("column index out of range");
    if (r == 1) throw ValidationError("rank-one frame has no reduced frame");
    const IndexSet rest = IndexSet::full(r).without(j);
    const Eigen::MatrixXd p = orthonormal_rows(select_columns(frame.w, rest));
    return ErrorFunctionFrame::from_columns(p * select_columns(frame.m, rest));
}

ErrorFunctionFrame subset_frame(const ErrorFunctionFrame& frame, IndexSet s) {
    if (s.empty()) throw ValidationError("empty subset has no frame");
    const auto proj = subset_projectors(frame, s);
    return ErrorFunctionFrame::from_columns(proj.q * select_columns(frame.m, s));
}

namespace {

double lower_rank(const ErrFnArgument& arg, int j, FunctionKind kind, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    if (r == 1) return 1.0;
    const IndexSet rest = IndexSet::full(r).without(j);
    const Eigen::MatrixXd p = orthonormal_rows(select_columns(arg.frame.w, rest));
    const ErrorFunctionFrame child = ErrorFunctionFrame::from_columns(p * select_columns(arg.frame.m, rest));
    return ErrorFunction(child, quad).evaluate(kind, p * arg.u).value;
}

}  // namespace

double derivative(const ErrFnArgument& arg, int j, FunctionKind kind, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    if (j < 0 || j >= r) throw ValidationError("derivative index out of range");
    if (arg.u.size() != r) throw ValidationError("argument length does not match frame rank");
    const double norm = arg.frame.m.col(j).norm();
    const double a = arg.frame.m.col(j).dot(arg.u) / norm;
    return 2.0 / norm * std::exp(-kPi * a * a) * lower_rank(arg, j, kind, quad);
}

double shadow(const ErrFnArgument& arg, FunctionKind kind, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    if (arg.u.size() != r) throw ValidationError("argument length does not match frame rank");
    double total = 0.0;
    for (int j = 0; j < r; ++j) {
        const double a = arg.frame.m.col(j).dot(arg.u) / arg.frame.m.col(j).norm();
        if (a == 0.0) continue;
        total += a * std::exp(-kPi * a * a) * lower_rank(arg, j, kind, quad);
    }
    return total;
}

double discontinuity_limit(const ErrFnArgument& arg, IndexSet s, std::span<const int> approach_signs,
                           const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    if (!s.subset_of(IndexSet::full(r)) || s == IndexSet::full(r))
        throw ValidationError("limit subset must be a proper subset of the frame indices");
    const int crossing = r - s.size();
    if (static_cast<int>(approach_signs.size()) != crossing)
        throw ValidationError("one approach sign is needed per index outside the subset");
    double sign = crossing % 2 ? -1.0 : 1.0;
    for (int a : approach_signs) {
        if (a != 1 && a != -1) throw ValidationError("approach signs must be +1 or -1");
        sign *= a;
    }
    if (s.empty()) return sign;
    const auto proj = subset_projectors(arg.frame, s);
    const ErrorFunctionFrame sub = ErrorFunctionFrame::from_columns(proj.q * select_columns(arg.frame.m, s));
    return sign * ErrorFunction(sub, quad).complementary(proj.q * arg.u).value;
}

BoundCheck bound_check(const ErrFnArgument& arg, const QuadratureSpec& quad, double rhs_scale) {
    const ErrFnValue m = eval_M(arg, quad);
    const int r = arg.frame.rank();
    double fact = 1.0;
    for (int k = 2; k <= r; ++k) fact *= k;
    BoundCheck out;
    out.lhs = std::fabs(m.value);
    out.rhs = rhs_scale * fact * std::exp(-kPi * arg.u.squaredNorm());
    out.ok = out.lhs <= out.rhs + m.est_error;
    return out;
}

double vigneras_residual(const ErrFnArgument& arg, FunctionKind kind, double h, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    if (!(h > 0.0)) throw ValidationError("step must be positive");
    if (arg.u.size() != r) throw ValidationError("argument length does not match frame rank");
    const ErrorFunction f(arg.frame, quad);
    if (kind == FunctionKind::M && f.wall_distance(arg.u) < 2.0 * h)
        throw WallTooClose("finite-difference stencil crosses a wall");
    const double centre = f.evaluate(kind, arg.u).value;
    double total = 0.0;
    for (int j = 0; j < r; ++j) {
        Eigen::VectorXd up = arg.u, dn = arg.u;
        up(j) += h;
        dn(j) -= h;
        const double fp = f.evaluate(kind, up).value;
        const double fm = f.evaluate(kind, dn).value;
        const double second = (fp - 2.0 * centre + fm) / (h * h);
        const double first = (fp - fm) / (2.0 * h);
        total += second + 2.0 * kPi * arg.u(j) * first;
    }
    return total;
}

std::vector<DecompositionTerm> decompose_M_into_E(const ErrFnArgument& arg, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    const ErrorFunction f(arg.frame, quad);
    if (f.wall_distance(arg.u) < wall_eps(arg.u)) throw WallTooClose("argument lies within wall_eps of a wall");
    std::vector<DecompositionTerm> out;
    for (IndexSet s : subsets_of_range(r)) {
        const IndexSet rest = s.complement(r);
        DecompositionTerm t;
        t.s = s;
        int coeff = (rest.size() % 2) ? -1 : 1;
        for (int k : rest.indices()) coeff *= static_cast<int>(sgn(arg.frame.w.col(k).dot(arg.u)));
        t.coefficient = coeff;
        if (s.empty()) {
            t.value = 1.0;
        } else if (s == IndexSet::full(r)) {
            const ErrFnValue v = f.error(arg.u);
            t.value = v.value;
            t.est_error = v.est_error;
        } else {
            const auto proj = subset_projectors(arg.frame, s);
            const ErrorFunctionFrame sub = ErrorFunctionFrame::from_columns(proj.q * select_columns(arg.frame.m, s));
            const ErrFnValue v = ErrorFunction(sub, quad).error(proj.q * arg.u);
            t.value = v.value;
            t.est_error = v.est_error;
        }
        out.push_back(t);
    }
    return out;
}

std::vector<DecompositionTerm> decompose_E_into_M(const ErrFnArgument& arg, const QuadratureSpec& quad) {
    const int r = arg.frame.rank();
    const ErrorFunction f(arg.frame, quad);
    if (f.decomposition_margin(arg.u) < wall_eps(arg.u))
        throw WallTooClose("argument lies within wall_eps of a decomposition wall");
    std::vector<DecompositionTerm> out;
    const IndexSet full = IndexSet::full(r);
    for (IndexSet s : subsets_of_range(r)) {
        const IndexSet rest = s.complement(r);
        DecompositionTerm t;
        t.s = s;
        int coeff = 1;
        if (!rest.empty()) {
            const Eigen::MatrixXd p =
                rest == full ? Eigen::MatrixXd::Identity(r, r) : orthonormal_rows(select_columns(arg.frame.w, rest));
            const Eigen::VectorXd pu = p.transpose() * (p * arg.u);
            for (int k : rest.indices()) coeff *= static_cast<int>(sgn(arg.frame.m.col(k).dot(pu)));
        }
        t.coefficient = coeff;
        if (s.empty()) {
            t.value = 1.0;
        } else if (s == full) {
            const ErrFnValue v = f.complementary(arg.u);
            t.value = v.value;
            t.est_error = v.est_error;
        } else {
            const auto proj = subset_projectors(arg.frame, s);
            const ErrorFunctionFrame sub = ErrorFunctionFrame::from_columns(proj.q * select_columns(arg.frame.m, s));
            const ErrFnValue v = ErrorFunction(sub, quad).complementary(proj.q * arg.u);
            t.value = v.value;
            t.est_error = v.est_error;
        }
        out.push_back(t);
    }
    return out;
}

double sum_terms(const std::vector<DecompositionTerm>& terms) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.value;
    return s;
}

}  // namespace thetaforge
