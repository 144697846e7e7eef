#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace szegolab {

// Hermitian form on C^m given by its matrix in a fixed frame.  Conjugate
// symmetry is validated on construction (absolute tolerance 1e-12 relative to
// the matrix scale).
class HermitianForm {
  public:
    explicit HermitianForm(Eigen::MatrixXcd m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols() || mat_.rows() == 0)
            throw std::invalid_argument("HermitianForm: need a square nonempty matrix");
        double scale = std::max(1.0, mat_.cwiseAbs().maxCoeff());
        if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw std::invalid_argument("HermitianForm: matrix is not conjugate-symmetric");
        mat_ = 0.5 * (mat_ + mat_.adjoint().eval());  // exact Hermitian representative
    }

    static HermitianForm zero(int m) { return HermitianForm(Eigen::MatrixXcd::Zero(m, m)); }

    static HermitianForm diagonal(const Eigen::VectorXd& d) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d.size(), d.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = d(i);
        return HermitianForm(std::move(m));
    }

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return mat_; }
    std::complex<double> operator()(int i, int j) const { return mat_(i, j); }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    double min_eigenvalue() const { return eigenvalues().minCoeff(); }

    bool is_positive_definite(double tol = 1e-12) const { return min_eigenvalue() > tol; }

    double det_real() const { return mat_.determinant().real(); }

  private:
    Eigen::MatrixXcd mat_;
};

}  // namespace szegolab
