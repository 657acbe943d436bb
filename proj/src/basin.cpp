#include "wlab/basin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wlab/errors.hpp"
#include "wlab/rng.hpp"

namespace wlab {
namespace {

void check_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw ValidationError(std::string(what) + " must be a non-empty square matrix");
    }
}

void check_symmetric(const Matrix& h) {
    check_square(h, "Hessian");
    if (!h.allFinite()) throw ValidationError("Hessian has non-finite entries");
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance) {
        throw ValidationError("Hessian is not symmetric (max |H - H^T| = " + std::to_string(asym) +
                              ")");
    }
}

// Orient each column so that its largest-magnitude entry is positive.
void fix_signs(Matrix& u) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index r = 0;
        u.col(c).cwiseAbs().maxCoeff(&r);
        if (u(r, c) < 0.0) u.col(c) = -u.col(c);
    }
}

}  // namespace

Eigensystem eigendecompose(const Matrix& h) {
    check_symmetric(h);
    const Matrix sym = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    Eigensystem es{solver.eigenvectors(), solver.eigenvalues()};
    if (!(es.values.minCoeff() > 0.0)) {
        throw NotPositiveDefiniteError("Hessian is not positive definite (smallest eigenvalue " +
                                       std::to_string(es.values.minCoeff()) + ")");
    }
    fix_signs(es.vectors);
    return es;
}

MomentMatch patnaik_params(const Vector& delta) {
    require(delta.size() > 0, "eigenvalue sequence must not be empty");
    require(delta.allFinite() && delta.minCoeff() > 0.0, "eigenvalues must be positive");
    const double s1 = delta.sum();
    const double s2 = delta.squaredNorm();
    return {0.5 * s1 / s2, 0.5 * s1 * s1 / s2};
}

QuadraticBasin::QuadraticBasin(Matrix h, Matrix u, Vector delta)
    : h_(std::move(h)), u_(std::move(u)), delta_(std::move(delta)), moments_(patnaik_params(delta_)) {}

QuadraticBasin QuadraticBasin::from_hessian(const Matrix& h) {
    Eigensystem es = eigendecompose(h);
    return QuadraticBasin(h, std::move(es.vectors), std::move(es.values));
}

QuadraticBasin QuadraticBasin::from_eigensystem(const Matrix& u, const Vector& delta) {
    check_square(u, "eigenvector matrix");
    require(u.rows() == delta.size(), "eigenvector matrix and eigenvalues disagree in dimension");
    if (!(delta.allFinite() && delta.minCoeff() > 0.0)) {
        throw NotPositiveDefiniteError("eigenvalues must be positive");
    }
    const Eigen::Index n = delta.size();
    const double orth = (u.transpose() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    require(orth <= 1e-10, "eigenvector matrix is not orthonormal");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return delta[a] < delta[b]; });
    Matrix us(n, n);
    Vector ds(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        us.col(i) = u.col(order[static_cast<std::size_t>(i)]);
        ds[i] = delta[order[static_cast<std::size_t>(i)]];
    }
    fix_signs(us);
    Matrix h = us * ds.asDiagonal() * us.transpose();
    h = 0.5 * (h + h.transpose());
    return QuadraticBasin(std::move(h), std::move(us), std::move(ds));
}

double evaluate(const QuadraticBasin& basin, const Vector& x) {
    require(x.size() == basin.dim(), "vector length does not match basin dimension");
    return std::max(0.0, x.dot(basin.hessian() * x));
}

QuadraticBasin random_pd_hessian(int n, double eig_low, double eig_high, std::uint64_t seed) {
    require(n >= 2, "random_pd_hessian requires n >= 2");
    require(eig_low > 0.0 && eig_low <= eig_high && std::isfinite(eig_high),
            "eigenvalue range must satisfy 0 < eig_low <= eig_high");
    rng::Substream stream(rng::derive_key(seed, rng::Purpose::Hessian), 0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = stream.normal();
    }
    a = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    Vector delta(n);
    for (int i = 0; i < n; ++i) delta[i] = stream.uniform(eig_low, eig_high);
    return QuadraticBasin::from_eigensystem(solver.eigenvectors(), delta);
}

double commutator_max_norm(const Matrix& a, const Matrix& b) {
    require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
            "commutator requires square matrices of equal dimension");
    return (a * b - b * a).cwiseAbs().maxCoeff();
}

namespace {

// scores(i, g): how well vector i fits slot group g; capacity[g] slots each.
double greedy_min_score(const Matrix& scores, std::vector<int> capacity) {
    const Eigen::Index rows = scores.rows();
    std::vector<bool> used(static_cast<std::size_t>(rows), false);
    double worst = 1.0;
    for (Eigen::Index step = 0; step < rows; ++step) {
        double best = -1.0;
        Eigen::Index bi = -1;
        Eigen::Index bg = -1;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index g = 0; g < scores.cols(); ++g) {
                if (capacity[static_cast<std::size_t>(g)] > 0 && scores(i, g) > best) {
                    best = scores(i, g);
                    bi = i;
                    bg = g;
                }
            }
        }
        used[static_cast<std::size_t>(bi)] = true;
        --capacity[static_cast<std::size_t>(bg)];
        worst = std::min(worst, best);
    }
    return worst;
}

}  // namespace

double eigenvector_alignment(const Matrix& ua, const Matrix& ub) {
    require(ua.rows() == ub.rows() && ua.cols() == ub.cols() && ua.rows() == ua.cols(),
            "alignment requires square matrices of equal dimension");
    const Matrix a = ua.colwise().normalized();
    const Matrix b = ub.colwise().normalized();
    return greedy_min_score((a.transpose() * b).cwiseAbs(),
                            std::vector<int>(static_cast<std::size_t>(b.cols()), 1));
}

double eigenbasis_alignment(const Matrix& c, const Matrix& h, double rel_tol) {
    require(c.rows() == c.cols() && h.rows() == h.cols() && c.rows() == h.rows(),
            "alignment requires square matrices of equal dimension");
    const Eigen::SelfAdjointEigenSolver<Matrix> ec(0.5 * (c + c.transpose()));
    const Eigen::SelfAdjointEigenSolver<Matrix> eh(0.5 * (h + h.transpose()));
    if (ec.info() != Eigen::Success || eh.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    const Vector& dh = eh.eigenvalues();
    const Eigen::Index n = h.rows();
    const double scale = dh.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> starts{0};
    for (Eigen::Index i = 1; i < n; ++i) {
        if (dh[i] - dh[i - 1] > rel_tol * scale) starts.push_back(i);
    }
    starts.push_back(n);
    const Eigen::Index groups = static_cast<Eigen::Index>(starts.size()) - 1;
    Matrix scores(n, groups);
    std::vector<int> capacity;
    for (Eigen::Index g = 0; g < groups; ++g) {
        const Eigen::Index s0 = starts[static_cast<std::size_t>(g)];
        const Eigen::Index len = starts[static_cast<std::size_t>(g) + 1] - s0;
        const Matrix basis = eh.eigenvectors().middleCols(s0, len);
        scores.col(g) = (basis.transpose() * ec.eigenvectors()).colwise().norm().transpose();
        capacity.push_back(static_cast<int>(len));
    }
    return std::min(1.0, greedy_min_score(scores, capacity));
}

MatrixSpec::MatrixSpec(Form form) : form_(std::move(form)) {
    if (const auto* d = std::get_if<DenseSpec>(&form_)) {
        check_symmetric(d->values);
    } else if (const auto* g = std::get_if<DiagonalSpec>(&form_)) {
        require(!g->values.empty(), "diagonal spec must not be empty");
        for (double v : g->values) {
            if (!(v > 0.0 && std::isfinite(v))) {
                throw NotPositiveDefiniteError("diagonal entries must be positive");
            }
        }
    } else {
        const auto& iso = std::get<IsotropicSpec>(form_);
        require(iso.n >= 1, "isotropic spec requires n >= 1");
        if (!(iso.h0 > 0.0 && std::isfinite(iso.h0))) {
            throw NotPositiveDefiniteError("isotropic spec requires h0 > 0");
        }
    }
}

int MatrixSpec::dim() const {
    return std::visit(
        [](const auto& f) -> int {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, DenseSpec>) {
                return static_cast<int>(f.values.rows());
            } else if constexpr (std::is_same_v<T, DiagonalSpec>) {
                return static_cast<int>(f.values.size());
            } else {
                return f.n;
            }
        },
        form_);
}

QuadraticBasin MatrixSpec::build() const {
    if (const auto* d = std::get_if<DenseSpec>(&form_)) return QuadraticBasin::from_hessian(d->values);
    const int n = dim();
    if (const auto* g = std::get_if<DiagonalSpec>(&form_)) {
        const Vector delta = Eigen::Map<const Vector>(g->values.data(), n);
        return QuadraticBasin::from_eigensystem(Matrix::Identity(n, n), delta);
    }
    const auto& iso = std::get<IsotropicSpec>(form_);
    return QuadraticBasin::from_eigensystem(Matrix::Identity(n, n), Vector::Constant(n, iso.h0));
}

nlohmann::json MatrixSpec::to_json() const {
    nlohmann::json j;
    if (const auto* d = std::get_if<DenseSpec>(&form_)) {
        auto rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < d->values.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < d->values.cols(); ++c) row.push_back(d->values(r, c));
            rows.push_back(std::move(row));
        }
        j["dense"] = std::move(rows);
    } else if (const auto* g = std::get_if<DiagonalSpec>(&form_)) {
        j["diag"] = g->values;
    } else {
        const auto& iso = std::get<IsotropicSpec>(form_);
        j["isotropic"] = {{"n", iso.n}, {"h0", iso.h0}};
    }
    return j;
}

MatrixSpec MatrixSpec::from_json(const nlohmann::json& j) {
    require(j.is_object(), "matrix spec must be a JSON object");
    const int keys = static_cast<int>(j.contains("dense")) + static_cast<int>(j.contains("diag")) +
                     static_cast<int>(j.contains("isotropic"));
    require(keys == 1 && j.size() == 1,
            "matrix spec must have exactly one of the keys \"dense\", \"diag\", \"isotropic\"");
    try {
        if (j.contains("dense")) {
            const auto& rows = j.at("dense");
            require(rows.is_array() && !rows.empty(), "\"dense\" must be a non-empty array of rows");
            const auto n = static_cast<Eigen::Index>(rows.size());
            Matrix m(n, n);
            for (Eigen::Index r = 0; r < n; ++r) {
                const auto& row = rows.at(static_cast<std::size_t>(r));
                require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n,
                        "\"dense\" must be square");
                for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
            }
            return MatrixSpec(DenseSpec{std::move(m)});
        }
        if (j.contains("diag")) {
            return MatrixSpec(DiagonalSpec{j.at("diag").get<std::vector<double>>()});
        }
        const auto& iso = j.at("isotropic");
        return MatrixSpec(IsotropicSpec{iso.at("n").get<int>(), iso.at("h0").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed matrix spec: ") + e.what());
    }
}

bool operator==(const MatrixSpec& a, const MatrixSpec& b) {
    if (a.form_.index() != b.form_.index()) return false;
    if (const auto* d = std::get_if<DenseSpec>(&a.form_)) {
        const auto& e = std::get<DenseSpec>(b.form_);
        return d->values.rows() == e.values.rows() && d->values == e.values;
    }
    if (const auto* g = std::get_if<DiagonalSpec>(&a.form_)) {
        return g->values == std::get<DiagonalSpec>(b.form_).values;
    }
    const auto& x = std::get<IsotropicSpec>(a.form_);
    const auto& y = std::get<IsotropicSpec>(b.form_);
    return x.n == y.n && x.h0 == y.h0;
}

}  // namespace wlab
