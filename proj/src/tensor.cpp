// SPDX-License-Identifier: MIT
#include "spiketensor/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace spiketensor {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t checked_product(const Dims& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        require(d > 0, "tensor dimensions must be positive");
        require(n <= kMaxEntries / d, "tensor exceeds the 2^28 entry cap");
        n *= d;
    }
    return n;
}

// out[pre + a*post] = sum_j in[pre + a*(j + dm*post)] * v[j]
Vector contract_mode(std::span<const double> in, std::size_t a, std::size_t dm, std::size_t b,
                     std::span<const double> v) {
    Vector out(a * b, 0.0);
    if (a == 1) {
        for (std::size_t post = 0; post < b; ++post) {
            const double* x = in.data() + dm * post;
            double s = 0.0;
            for (std::size_t j = 0; j < dm; ++j) s += x[j] * v[j];
            out[post] = s;
        }
        return out;
    }
    for (std::size_t post = 0; post < b; ++post) {
        double* o = out.data() + a * post;
        for (std::size_t j = 0; j < dm; ++j) {
            const double vj = v[j];
            const double* x = in.data() + a * (j + dm * post);
            for (std::size_t pre = 0; pre < a; ++pre) o[pre] += vj * x[pre];
        }
    }
    return out;
}

// Contracts every mode whose flag is set; remaining modes keep their relative order.
Vector contract_modes(const DenseTensor& t, std::span<const std::span<const double>> vs,
                      const std::vector<bool>& contract) {
    Dims cur = t.dims();
    Vector buf;
    bool first = true;
    for (std::size_t m = t.order(); m-- > 0;) {
        if (!contract[m]) continue;
        std::size_t a = 1, b = 1;
        for (std::size_t j = 0; j < m; ++j) a *= cur[j];
        for (std::size_t j = m + 1; j < cur.size(); ++j) b *= cur[j];
        std::span<const double> in = first ? t.values() : std::span<const double>(buf);
        Vector next = contract_mode(in, a, cur[m], b, vs[m]);
        buf = std::move(next);
        first = false;
        cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(m));
    }
    if (first) return Vector(t.values().begin(), t.values().end());
    return buf;
}

void check_lengths(const DenseTensor& t, std::span<const std::span<const double>> vs,
                   std::size_t skip) {
    for (std::size_t m = 0; m < t.order(); ++m) {
        if (m == skip) continue;
        require(vs[m].size() == t.dim(m), "vector length does not match tensor dimension");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// UnitVector

UnitVector::UnitVector(Vector values) : values_(std::move(values)) {
    require(all_finite(values_), "unit vector has non-finite entries");
    require(std::abs(norm2(values_) - 1.0) <= 1e-10, "vector is not unit norm");
}

UnitVector UnitVector::normalize(Vector values) {
    require(all_finite(values), "cannot normalize a non-finite vector");
    const double n = norm2(values);
    require(n > 0.0, "cannot normalize a zero vector");
    for (double& x : values) x /= n;
    UnitVector u;
    u.values_ = std::move(values);
    return u;
}

UnitVector UnitVector::negated() const {
    UnitVector u = *this;
    for (double& x : u.values_) x = -x;
    return u;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    // Scaled to avoid overflow on heavy-tailed data.
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double x : a) {
        const double y = x / scale;
        s += y * y;
    }
    return scale * std::sqrt(s);
}

std::vector<std::span<const double>> views(const std::vector<UnitVector>& vs) {
    std::vector<std::span<const double>> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.emplace_back(v.span());
    return out;
}

std::vector<std::span<const double>> views(const std::vector<Vector>& vs) {
    std::vector<std::span<const double>> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.emplace_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require(values_.size() == rows_ * cols_, "matrix value count does not match shape");
    require(all_finite(values_), "matrix has non-finite entries");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
    require(!rows.empty(), "matrix needs at least one row");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == m.cols(), "ragged matrix rows");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

double Matrix::frobenius_norm() const { return norm2(values_); }

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "matrix shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "matrix shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double blj = b(l, j);
            if (blj == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, l) * blj;
        }
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    require(a.cols() == x.size(), "matrix-vector shape mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += a(i, j) * x[j];
    return y;
}

Matrix gram(const Matrix& m) {
    const std::size_t n = m.rows();
    Matrix g(n, n);
    // Rank-one updates over columns, upper triangle only.
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto x = m.column(c);
        for (std::size_t s = 0; s < n; ++s) {
            const double xs = x[s];
            if (xs == 0.0) continue;
            for (std::size_t r = 0; r <= s; ++r) g(r, s) += x[r] * xs;
        }
    }
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t r = 0; r < s; ++r) g(s, r) = g(r, s);
    return g;
}

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(Dims dims, Vector values) : dims_(std::move(dims)), values_(std::move(values)) {
    require(!dims_.empty() && dims_.size() <= kMaxOrder, "tensor order must be between 1 and 6");
    require(values_.size() == checked_product(dims_), "value count does not match dimensions");
    require(all_finite(values_), "tensor has non-finite entries");
}

DenseTensor DenseTensor::zeros(Dims dims) {
    const std::size_t n = (dims.empty() || dims.size() > kMaxOrder) ? 0 : checked_product(dims);
    return DenseTensor(std::move(dims), Vector(n, 0.0));
}

double DenseTensor::at(std::span<const std::size_t> index) const {
    require(index.size() == order(), "index arity does not match tensor order");
    std::size_t flat = 0, stride = 1;
    for (std::size_t m = 0; m < order(); ++m) {
        require(index[m] < dims_[m], "tensor index out of range");
        flat += index[m] * stride;
        stride *= dims_[m];
    }
    return values_[flat];
}

std::size_t DenseTensor::stride_before(std::size_t k) const {
    std::size_t a = 1;
    for (std::size_t j = 0; j < k; ++j) a *= dims_[j];
    return a;
}

std::size_t DenseTensor::stride_after(std::size_t k) const {
    std::size_t b = 1;
    for (std::size_t j = k + 1; j < dims_.size(); ++j) b *= dims_[j];
    return b;
}

DenseTensor make_tensor(Dims dims, Vector values) { return DenseTensor(std::move(dims), std::move(values)); }

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
    require(a.dims() == b.dims(), "tensor shape mismatch");
    Vector v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return DenseTensor(a.dims(), std::move(v));
}

DenseTensor operator*(const DenseTensor& a, double s) {
    Vector v(a.values().begin(), a.values().end());
    for (double& x : v) x *= s;
    return DenseTensor(a.dims(), std::move(v));
}

Matrix matricize(const DenseTensor& t, std::size_t k) {
    require(k < t.order(), "mode index out of range");
    const std::size_t a = t.stride_before(k), dk = t.dim(k), b = t.stride_after(k);
    Matrix m(dk, a * b);
    for (std::size_t post = 0; post < b; ++post)
        for (std::size_t i = 0; i < dk; ++i)
            for (std::size_t pre = 0; pre < a; ++pre)
                m(i, pre + a * post) = t[pre + a * (i + dk * post)];
    return m;
}

Matrix mode_gram(const DenseTensor& t, std::size_t k) {
    require(k < t.order(), "mode index out of range");
    const std::size_t a = t.stride_before(k), dk = t.dim(k), b = t.stride_after(k);
    const double* v = t.values().data();
    Matrix g(dk, dk);
    if (a == 1) {
        for (std::size_t post = 0; post < b; ++post) {
            const double* x = v + dk * post;
            for (std::size_t s = 0; s < dk; ++s) {
                const double xs = x[s];
                for (std::size_t r = 0; r <= s; ++r) g(r, s) += x[r] * xs;
            }
        }
    } else {
        for (std::size_t post = 0; post < b; ++post) {
            const double* slab = v + a * dk * post;
            for (std::size_t s = 0; s < dk; ++s)
                for (std::size_t r = 0; r <= s; ++r) {
                    const double* xr = slab + a * r;
                    const double* xs = slab + a * s;
                    double acc = 0.0;
                    for (std::size_t pre = 0; pre < a; ++pre) acc += xr[pre] * xs[pre];
                    g(r, s) += acc;
                }
        }
    }
    for (std::size_t s = 0; s < dk; ++s)
        for (std::size_t r = 0; r < s; ++r) g(s, r) = g(r, s);
    return g;
}

Vector contract_except(const DenseTensor& t, std::size_t k,
                       std::span<const std::span<const double>> vs) {
    require(k < t.order(), "mode index out of range");
    require(vs.size() == t.order(), "need one vector per mode");
    check_lengths(t, vs, k);
    std::vector<bool> flags(t.order(), true);
    flags[k] = false;
    return contract_modes(t, vs, flags);
}

Vector mode_contract_all_but(const DenseTensor& t, std::size_t k,
                             std::span<const std::span<const double>> vs) {
    require(k < t.order(), "mode index out of range");
    require(vs.size() + 1 == t.order(), "need one vector per mode other than k");
    std::vector<std::span<const double>> full;
    full.reserve(t.order());
    for (std::size_t m = 0, j = 0; m < t.order(); ++m) full.push_back(m == k ? std::span<const double>{} : vs[j++]);
    return contract_except(t, k, full);
}

double full_contract(const DenseTensor& t, std::span<const std::span<const double>> vs) {
    require(vs.size() == t.order(), "need one vector per mode");
    check_lengths(t, vs, t.order());
    return contract_modes(t, vs, std::vector<bool>(t.order(), true)).front();
}

DenseTensor outer_rank1(double lambda, std::span<const std::span<const double>> vs) {
    require(lambda >= 0.0 && std::isfinite(lambda), "signal strength must be nonnegative");
    require(!vs.empty(), "need at least one factor");
    Dims dims;
    for (auto v : vs) dims.push_back(v.size());
    Vector out{lambda};
    // Grow by Kronecker product; earlier modes vary fastest.
    for (auto v : vs) {
        Vector next(out.size() * v.size());
        for (std::size_t j = 0; j < v.size(); ++j)
            for (std::size_t i = 0; i < out.size(); ++i) next[i + out.size() * j] = out[i] * v[j];
        out = std::move(next);
    }
    return DenseTensor(std::move(dims), std::move(out));
}

Vector fiber(const DenseTensor& t, std::size_t k, std::span<const std::size_t> idx) {
    require(k < t.order(), "mode index out of range");
    require(idx.size() + 1 == t.order(), "fiber index needs one entry per mode other than k");
    std::size_t base = 0, stride = 1;
    for (std::size_t m = 0, j = 0; m < t.order(); ++m) {
        if (m != k) {
            require(idx[j] < t.dim(m), "fiber index out of range");
            base += idx[j++] * stride;
        }
        stride *= t.dim(m);
    }
    const std::size_t step = t.stride_before(k);
    Vector out(t.dim(k));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t[base + step * i];
    return out;
}

double frobenius_norm(const DenseTensor& t) { return norm2(t.values()); }

SliceSplit slice_split(const DenseTensor& t, std::size_t k, std::span<const std::size_t> first) {
    require(k < t.order(), "mode index out of range");
    const std::size_t dk = t.dim(k);
    std::vector<bool> in_first(dk, false);
    for (std::size_t i : first) {
        require(i < dk, "split index out of range");
        require(!in_first[i], "duplicate split index");
        in_first[i] = true;
    }
    SliceSplit out;
    out.mode = k;
    for (std::size_t i = 0; i < dk; ++i) (in_first[i] ? out.first_indices : out.second_indices).push_back(i);
    require(!out.first_indices.empty() && !out.second_indices.empty(),
            "split subset must be a nonempty proper subset");

    const std::size_t a = t.stride_before(k), b = t.stride_after(k);
    auto take = [&](const std::vector<std::size_t>& rows) {
        Dims dims = t.dims();
        dims[k] = rows.size();
        Vector v;
        v.reserve(a * rows.size() * b);
        for (std::size_t post = 0; post < b; ++post)
            for (std::size_t i : rows) {
                const double* src = t.values().data() + a * (i + dk * post);
                v.insert(v.end(), src, src + a);
            }
        return DenseTensor(std::move(dims), std::move(v));
    };
    out.first = take(out.first_indices);
    out.second = take(out.second_indices);
    return out;
}

DenseTensor reassemble(const SliceSplit& split) {
    const std::size_t k = split.mode;
    const std::size_t n1 = split.first_indices.size(), n2 = split.second_indices.size();
    Dims dims = split.first.dims();
    dims[k] = n1 + n2;
    const std::size_t a = split.first.stride_before(k), b = split.first.stride_after(k);
    const std::size_t dk = dims[k];
    Vector v(a * dk * b);
    auto put = [&](const DenseTensor& part, const std::vector<std::size_t>& rows) {
        for (std::size_t post = 0; post < b; ++post)
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double* src = part.values().data() + a * (r + rows.size() * post);
                std::copy(src, src + a, v.begin() + static_cast<std::ptrdiff_t>(a * (rows[r] + dk * post)));
            }
    };
    put(split.first, split.first_indices);
    put(split.second, split.second_indices);
    return DenseTensor(std::move(dims), std::move(v));
}

// ---------------------------------------------------------------------------
// Text I/O

DenseTensor read_tensor_text(std::istream& in) {
    std::size_t p = 0;
    if (!(in >> p)) throw InvalidArgument("tensor text: missing order");
    require(p >= 1 && p <= kMaxOrder, "tensor text: order must be between 1 and 6");
    Dims dims(p);
    for (auto& d : dims)
        if (!(in >> d)) throw InvalidArgument("tensor text: missing dimension");
    const std::size_t n = checked_product(dims);
    Vector values;
    values.reserve(n);
    std::string token;
    while (values.size() < n && in >> token) {
        double x = 0.0;
        const auto* end = token.data() + token.size();
        auto [ptr, ec] = std::from_chars(token.data(), end, x);
        if (ec != std::errc{} || ptr != end) throw InvalidArgument("tensor text: bad real '" + token + "'");
        values.push_back(x);
    }
    require(values.size() == n, "tensor text: too few values");
    if (in >> token) throw InvalidArgument("tensor text: trailing data");
    return DenseTensor(std::move(dims), std::move(values));
}

void write_tensor_text(std::ostream& out, const DenseTensor& t) {
    out << t.order();
    for (auto d : t.dims()) out << ' ' << d;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", t[i]);
        out << buf << ((i + 1) % 8 == 0 || i + 1 == t.size() ? '\n' : ' ');
    }
}

}  // namespace spiketensor
