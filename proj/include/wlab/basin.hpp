#pragma once

// Quadratic basins of attraction J(x) = x^T H x about an optimum at the
// origin, together with the eigensystem and moment-matching parameters
// that all distributional computations are expressed in.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace wlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-12;

struct Eigensystem {
    Matrix vectors;  // orthonormal columns
    Vector values;   // non-decreasing
};

/// Symmetric eigendecomposition with ascending eigenvalues and each
/// eigenvector oriented so that its largest-magnitude entry is positive.
/// Throws ValidationError for non-symmetric input and
/// NotPositiveDefiniteError when an eigenvalue is <= 0.
Eigensystem eigendecompose(const Matrix& h);

/// Rate and shape of the two-moment gamma fit to the law of z^T H z.
struct MomentMatch {
    double upsilon;
    double eta;
};

MomentMatch patnaik_params(const Vector& delta);

class QuadraticBasin {
public:
    /// Validates symmetry and positive definiteness, then diagonalizes.
    static QuadraticBasin from_hessian(const Matrix& h);

    /// Builds H = U diag(delta) U^T from a given orthonormal U; the
    /// eigenvalues are kept exactly as supplied (sorted ascending).
    static QuadraticBasin from_eigensystem(const Matrix& u, const Vector& delta);

    int dim() const { return static_cast<int>(delta_.size()); }
    const Matrix& hessian() const { return h_; }
    const Matrix& eigenvectors() const { return u_; }
    const Vector& eigenvalues() const { return delta_; }
    double upsilon() const { return moments_.upsilon; }
    double eta() const { return moments_.eta; }
    double condition_number() const { return delta_.maxCoeff() / delta_.minCoeff(); }

    /// True when all eigenvalues coincide exactly (H = h0 I).
    bool is_isotropic() const { return delta_.maxCoeff() == delta_.minCoeff(); }

private:
    QuadraticBasin(Matrix h, Matrix u, Vector delta);

    Matrix h_;
    Matrix u_;
    Vector delta_;
    MomentMatch moments_;
};

/// x^T H x.
double evaluate(const QuadraticBasin& basin, const Vector& x);

/// Random basin: eigenvectors from diagonalizing a symmetrized standard-normal
/// matrix, eigenvalues uniform on [eig_low, eig_high].
QuadraticBasin random_pd_hessian(int n, double eig_low, double eig_high, std::uint64_t seed);

/// max_ij |(AB - BA)_ij|.
double commutator_max_norm(const Matrix& a, const Matrix& b);

/// Greedy pairing of the columns of ua with those of ub by largest |cosine|;
/// returns the smallest |cosine| among the pairs.
double eigenvector_alignment(const Matrix& ua, const Matrix& ub);

/// Alignment of the eigenvectors of a symmetric c with the eigenspaces of h.
/// Eigenvalues of h within rel_tol of each other form one eigenspace, and the
/// score of a vector is the norm of its projection onto its paired eigenspace.
/// Reduces to eigenvector_alignment when the spectrum of h is simple.
double eigenbasis_alignment(const Matrix& c, const Matrix& h, double rel_tol = 1e-9);

// External representation of a Hessian.
struct DenseSpec {
    Matrix values;
};
struct DiagonalSpec {
    std::vector<double> values;
};
struct IsotropicSpec {
    int n;
    double h0;
};

class MatrixSpec {
public:
    using Form = std::variant<DenseSpec, DiagonalSpec, IsotropicSpec>;

    explicit MatrixSpec(Form form);

    const Form& form() const { return form_; }
    int dim() const;
    bool is_isotropic() const { return std::holds_alternative<IsotropicSpec>(form_); }

    QuadraticBasin build() const;

    nlohmann::json to_json() const;
    static MatrixSpec from_json(const nlohmann::json& j);

    friend bool operator==(const MatrixSpec& a, const MatrixSpec& b);

private:
    Form form_;
};

}  // namespace wlab
