// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace spiketensor {

using Dims = std::vector<std::size_t>;
using Vector = std::vector<double>;

inline constexpr std::size_t kMaxOrder = 6;
inline constexpr std::size_t kMaxEntries = std::size_t{1} << 28;

/// Thrown on shape, range and value-domain violations across the library.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Vector with Euclidean norm 1 (to 1e-10). Converts to a read-only span.
class UnitVector {
public:
    UnitVector() = default;

    /// Accepts an already-normalized vector; throws if the norm is off by more than 1e-10.
    explicit UnitVector(Vector values);

    /// Normalizes a nonzero finite vector.
    static UnitVector normalize(Vector values);

    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] std::span<const double> span() const { return values_; }
    operator std::span<const double>() const { return values_; }  // NOLINT

    [[nodiscard]] UnitVector negated() const;

    friend bool operator==(const UnitVector&, const UnitVector&) = default;

private:
    Vector values_;
};

/// Column-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, Vector values);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    /// Builds from row-major nested initializer data (convenient in tests).
    static Matrix from_rows(const std::vector<Vector>& rows);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i + rows_ * j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i + rows_ * j]; }

    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] std::span<const double> column(std::size_t j) const {
        return {values_.data() + rows_ * j, rows_};
    }

    [[nodiscard]] double frobenius_norm() const;
    [[nodiscard]] Matrix transpose() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector values_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// M * M^T, exactly symmetric.
Matrix gram(const Matrix& m);

/// Dense p-way tensor, colexicographic layout (first index fastest).
/// Immutable after construction.
class DenseTensor {
public:
    DenseTensor() = default;
    /// Validates 1 <= order <= 6, positive dims, entry cap, value count and finiteness.
    DenseTensor(Dims dims, Vector values);

    static DenseTensor zeros(Dims dims);

    [[nodiscard]] std::size_t order() const { return dims_.size(); }
    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t k) const { return dims_.at(k); }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    /// 0-based multi-index access.
    [[nodiscard]] double at(std::span<const std::size_t> index) const;
    [[nodiscard]] double operator[](std::size_t flat) const { return values_[flat]; }

    /// Product of dims strictly before / after mode k.
    [[nodiscard]] std::size_t stride_before(std::size_t k) const;
    [[nodiscard]] std::size_t stride_after(std::size_t k) const;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Dims dims_;
    Vector values_;
};

DenseTensor make_tensor(Dims dims, Vector values);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(const DenseTensor& a, double s);

/// Mode-k unfolding (k 0-based): d_k rows, remaining modes flattened colexicographically.
Matrix matricize(const DenseTensor& t, std::size_t k);

/// Gram matrix of the mode-k unfolding, computed without materializing it.
Matrix mode_gram(const DenseTensor& t, std::size_t k);

/// Contracts every mode except k. `vs` holds one vector per mode other than k, in mode order.
Vector mode_contract_all_but(const DenseTensor& t, std::size_t k,
                             std::span<const std::span<const double>> vs);

/// As above, but `vs` holds one vector per mode; entry k is ignored.
Vector contract_except(const DenseTensor& t, std::size_t k,
                       std::span<const std::span<const double>> vs);

/// <T, v_1 x ... x v_p>.
double full_contract(const DenseTensor& t, std::span<const std::span<const double>> vs);

/// lambda * v_1 x ... x v_p.
DenseTensor outer_rank1(double lambda, std::span<const std::span<const double>> vs);

/// Mode-k fiber with the remaining (0-based) indices fixed, in ascending mode order.
Vector fiber(const DenseTensor& t, std::size_t k, std::span<const std::size_t> idx);

double frobenius_norm(const DenseTensor& t);

struct SliceSplit {
    DenseTensor first;
    DenseTensor second;
    std::vector<std::size_t> first_indices;   // 0-based, ascending
    std::vector<std::size_t> second_indices;  // 0-based, ascending
    std::size_t mode = 0;
};

/// Splits along mode k into the slices listed in `first` and the complement.
SliceSplit slice_split(const DenseTensor& t, std::size_t k, std::span<const std::size_t> first);

/// Inverse of slice_split.
DenseTensor reassemble(const SliceSplit& split);

/// Text format: `p d1 ... dp` then product(dims) reals, colexicographic.
DenseTensor read_tensor_text(std::istream& in);
void write_tensor_text(std::ostream& out, const DenseTensor& t);

/// Span views over a list of vectors, for the contraction routines.
std::vector<std::span<const double>> views(const std::vector<UnitVector>& vs);
std::vector<std::span<const double>> views(const std::vector<Vector>& vs);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace spiketensor
