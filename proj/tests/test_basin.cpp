#include <gtest/gtest.h>

#include <cmath>

#include "wlab/basin.hpp"
#include "wlab/errors.hpp"

using namespace wlab;

namespace {

Matrix h1() {
    Matrix h(3, 3);
    h << std::sqrt(2.0) / 2.0, 0.25, 0.1, 0.25, 1.0, 0.0, 0.1, 0.0, std::sqrt(2.0);
    return h;
}

// Asymptotic Kolmogorov survival function.
double kolmogorov_pvalue(double d, std::size_t m) {
    const double t = (std::sqrt(static_cast<double>(m)) + 0.12 + 0.11 / std::sqrt(static_cast<double>(m))) * d;
    double p = 0.0;
    for (int k = 1; k < 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST(Eigendecompose, Identity) {
    const Eigensystem es = eigendecompose(Matrix::Identity(3, 3));
    EXPECT_TRUE(es.values.isApprox(Vector::Ones(3)));
    EXPECT_LT((es.vectors.cwiseAbs() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Eigendecompose, DiagonalGivesSortedPermutation) {
    const Eigensystem es = eigendecompose(Vector(Eigen::Vector3d(3, 1, 2)).asDiagonal());
    EXPECT_EQ(es.values, Vector(Eigen::Vector3d(1, 2, 3)));
    Matrix perm = Matrix::Zero(3, 3);
    perm(1, 0) = perm(2, 1) = perm(0, 2) = 1.0;
    EXPECT_EQ(es.vectors, perm);
}

TEST(Eigendecompose, ReconstructionAndOrthonormality) {
    const QuadraticBasin b = QuadraticBasin::from_hessian(h1());
    const Matrix& u = b.eigenvectors();
    const Matrix rec = u * b.eigenvalues().asDiagonal() * u.transpose();
    EXPECT_LT((rec - h1()).norm() / h1().norm(), 1e-10);
    EXPECT_LT((u.transpose() * u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index i = 1; i < 3; ++i) EXPECT_LE(b.eigenvalues()[i - 1], b.eigenvalues()[i]);
}

TEST(Eigendecompose, H1MatchesPrintedEigenvectors) {
    // Printed columns are ordered by descending eigenvalue.
    Matrix printed(3, 3);
    printed << 0.1692, -0.4680, 0.8674, 0.0981, -0.8677, -0.4873, 0.9807, 0.1675, -0.1010;
    const Matrix u = eigendecompose(h1()).vectors;
    for (int c = 0; c < 3; ++c) {
        const Vector ours = u.col(2 - c);
        const Vector theirs = printed.col(c);
        const double sign = ours.dot(theirs) < 0.0 ? -1.0 : 1.0;
        EXPECT_LT((sign * ours - theirs).cwiseAbs().maxCoeff(), 5e-4) << c;
    }
    EXPECT_NEAR(eigenvector_alignment(u, printed), 1.0, 1e-4);
}

TEST(Eigendecompose, Errors) {
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 1e-9;
    EXPECT_THROW(eigendecompose(asym), ValidationError);
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(eigendecompose(indefinite), NotPositiveDefiniteError);
    EXPECT_THROW(eigendecompose(Matrix(2, 3)), ValidationError);
}

TEST(RandomHessian, DegenerateSpectrumIsIdentity) {
    const QuadraticBasin b = random_pd_hessian(2, 1.0, 1.0, 7);
    EXPECT_EQ(b.eigenvalues(), Vector::Ones(2));
    EXPECT_LT((b.hessian() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RandomHessian, Deterministic) {
    const QuadraticBasin a = random_pd_hessian(5, 0.5, 5.0, 42);
    const QuadraticBasin b = random_pd_hessian(5, 0.5, 5.0, 42);
    EXPECT_EQ(a.hessian(), b.hessian());
    EXPECT_EQ(a.eigenvalues(), b.eigenvalues());
    EXPECT_NE(a.hessian(), random_pd_hessian(5, 0.5, 5.0, 43).hessian());
}

TEST(RandomHessian, EigenvaluesUniform) {
    std::vector<double> eig;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        const QuadraticBasin b = random_pd_hessian(5, 0.5, 5.0, 1000 + s);
        for (Eigen::Index i = 0; i < 5; ++i) eig.push_back(b.eigenvalues()[i]);
    }
    std::sort(eig.begin(), eig.end());
    double d = 0.0;
    const double m = static_cast<double>(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) {
        const double f = (eig[i] - 0.5) / 4.5;
        d = std::max({d, (i + 1) / m - f, f - i / m});
    }
    EXPECT_GT(kolmogorov_pvalue(d, eig.size()), 0.01) << d;
}

TEST(RandomHessian, Validation) {
    EXPECT_THROW(random_pd_hessian(1, 1.0, 2.0, 0), ValidationError);
    EXPECT_THROW(random_pd_hessian(3, 2.0, 1.0, 0), ValidationError);
    EXPECT_THROW(random_pd_hessian(3, 0.0, 1.0, 0), ValidationError);
}

TEST(Evaluate, Examples) {
    const QuadraticBasin id = QuadraticBasin::from_hessian(Matrix::Identity(3, 3));
    EXPECT_DOUBLE_EQ(evaluate(id, Vector::Ones(3)), 3.0);
    const QuadraticBasin d = QuadraticBasin::from_hessian(Vector(Eigen::Vector3d(1, 2, 3)).asDiagonal());
    EXPECT_DOUBLE_EQ(evaluate(d, Vector::Ones(3)), 6.0);
    const QuadraticBasin b = QuadraticBasin::from_hessian(h1());
    EXPECT_NEAR(evaluate(b, Vector(Eigen::Vector3d(1, 0, 0))), 0.70711, 1e-5);
    EXPECT_EQ(evaluate(b, Vector::Zero(3)), 0.0);
    EXPECT_THROW(evaluate(b, Vector::Ones(2)), ValidationError);
}

TEST(Patnaik, Examples) {
    const MomentMatch iso = patnaik_params(Vector::Constant(7, 2.5));
    EXPECT_NEAR(iso.upsilon, 1.0 / 5.0, 1e-15);
    EXPECT_NEAR(iso.eta, 3.5, 1e-14);
    const MomentMatch ones = patnaik_params(Vector::Ones(4));
    EXPECT_EQ(ones.upsilon, 0.5);
    EXPECT_EQ(ones.eta, 2.0);
    const MomentMatch m = patnaik_params(Vector(Eigen::Vector3d(1, 2, 3)));
    EXPECT_NEAR(m.upsilon, 3.0 / 14.0, 1e-16);
    EXPECT_NEAR(m.eta, 9.0 / 7.0, 1e-15);
    EXPECT_THROW(patnaik_params(Vector()), ValidationError);
    EXPECT_THROW(patnaik_params(Vector(Eigen::Vector2d(1, -1))), ValidationError);
}

TEST(Patnaik, EtaBoundedAndScaleCovariant) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const QuadraticBasin b = random_pd_hessian(6, 0.1, 10.0, s);
        EXPECT_LE(b.eta(), 3.0 + 1e-12);
        const MomentMatch scaled = patnaik_params(4.0 * b.eigenvalues());
        EXPECT_NEAR(scaled.upsilon, b.upsilon() / 4.0, 1e-14 * b.upsilon());
        EXPECT_NEAR(scaled.eta, b.eta(), 1e-14 * b.eta());
    }
}

TEST(Commutator, Examples) {
    Matrix b(2, 2);
    b << 1, 2, 3, 4;
    EXPECT_EQ(commutator_max_norm(Matrix::Identity(2, 2), b), 0.0);
    EXPECT_EQ(commutator_max_norm(Vector(Eigen::Vector2d(1, 2)).asDiagonal(), Vector(Eigen::Vector2d(3, 4)).asDiagonal()), 0.0);
    Matrix c(3, 3);
    c << 0.1631, -0.0369, -0.0107, -0.0369, 0.1188, 0.0024, -0.0107, 0.0024, 0.0810;
    EXPECT_LT(commutator_max_norm(h1(), c), 1e-3);
    EXPECT_THROW(commutator_max_norm(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), ValidationError);
}

TEST(Alignment, DegenerateEigenspaces) {
    Matrix c = Matrix::Identity(3, 3);
    c(0, 1) = c(1, 0) = 0.01;
    EXPECT_NEAR(eigenbasis_alignment(c, Matrix::Identity(3, 3)), 1.0, 1e-12);
    EXPECT_LT(eigenbasis_alignment(c, Vector(Eigen::Vector3d(1, 2, 3)).asDiagonal()), 0.75);
}

TEST(MatrixSpec, JsonRoundTrip) {
    for (const char* text : {R"({"dense": [[2, 0.5], [0.5, 1]]})", R"({"diag": [1, 2, 3]})",
                             R"({"isotropic": {"n": 100, "h0": 2.0}})"}) {
        const MatrixSpec s = MatrixSpec::from_json(nlohmann::json::parse(text));
        EXPECT_TRUE(MatrixSpec::from_json(s.to_json()) == s) << text;
    }
    const MatrixSpec iso = MatrixSpec::from_json(nlohmann::json::parse(R"({"isotropic": {"n": 4, "h0": 2.0}})"));
    EXPECT_EQ(iso.build().hessian(), 2.0 * Matrix::Identity(4, 4));
    EXPECT_TRUE(iso.build().is_isotropic());
}

TEST(MatrixSpec, Invalid) {
    for (const char* text : {R"({"dense": [[1, 0.1], [0, 1]]})", R"({"dense": [[1, 2], [2, 1]]})",
                             R"({"diag": [1, -2]})", R"({"isotropic": {"n": 0, "h0": 1}})",
                             R"({"diag": [1], "dense": [[1]]})", R"({})", R"({"dense": [[1, 2]]})"}) {
        EXPECT_THROW({ MatrixSpec::from_json(nlohmann::json::parse(text)).build(); }, ValidationError) << text;
    }
}
