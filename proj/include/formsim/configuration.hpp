#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace formsim {

/// Norm threshold below which two adjacent agents count as coincident and the
/// piecewise-zero branch of the control law applies.
inline constexpr double kCoincideEps = 1e-12;

/// Tolerance for accepting an input configuration as centroid-zero.
inline constexpr double kCentroidEps = 1e-9;

/// N points in R^n, stored flat (point-major). Point ids are 1-based to match
/// graph vertex ids.
class Configuration {
public:
    Configuration(int n_points, int dimension)
        : n_(n_points), dim_(dimension),
          coords_(static_cast<std::size_t>(n_points) *
                      static_cast<std::size_t>(dimension),
                  0.0) {
        validate_shape();
    }

    Configuration(int n_points, int dimension, std::vector<double> coords)
        : n_(n_points), dim_(dimension), coords_(std::move(coords)) {
        validate_shape();
        if (coords_.size() != static_cast<std::size_t>(n_) *
                                  static_cast<std::size_t>(dim_))
            throw std::invalid_argument(
                "Configuration: coords size != n_points * dimension");
    }

    /// Build from one row per point, all rows the same length.
    static Configuration from_points(
        const std::vector<std::vector<double>>& points) {
        if (points.size() < 2)
            throw std::invalid_argument("Configuration: need at least 2 points");
        const std::size_t dim = points.front().size();
        std::vector<double> flat;
        flat.reserve(points.size() * dim);
        for (const auto& p : points) {
            if (p.size() != dim)
                throw std::invalid_argument(
                    "Configuration: inconsistent point dimensions");
            flat.insert(flat.end(), p.begin(), p.end());
        }
        return Configuration(static_cast<int>(points.size()),
                             static_cast<int>(dim), std::move(flat));
    }

    int n_points() const { return n_; }
    int dimension() const { return dim_; }

    std::span<const double> point(int i) const {
        check_point(i);
        return {coords_.data() +
                    static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }

    std::span<double> point(int i) {
        check_point(i);
        return {coords_.data() +
                    static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }

    const std::vector<double>& coords() const { return coords_; }
    std::vector<double>& coords() { return coords_; }

    /// True once the configuration has been through project_to_centroid_zero.
    bool centroid_projected() const { return projected_; }
    void mark_projected() { projected_ = true; }

    bool operator==(const Configuration& other) const {
        return n_ == other.n_ && dim_ == other.dim_ && coords_ == other.coords_;
    }

private:
    void validate_shape() const {
        if (n_ < 2)
            throw std::invalid_argument("Configuration: need n_points >= 2");
        if (dim_ < 1)
            throw std::invalid_argument("Configuration: need dimension >= 1");
    }

    void check_point(int i) const {
        if (i < 1 || i > n_)
            throw std::out_of_range("Configuration: point id " +
                                    std::to_string(i) + " out of range [1," +
                                    std::to_string(n_) + "]");
    }

    int n_;
    int dim_;
    std::vector<double> coords_;
    bool projected_ = false;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm_squared(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) {
    return std::sqrt(norm_squared(a));
}

/// Mean of the points, (1/N) sum a_i.
inline std::vector<double> centroid(const Configuration& c) {
    std::vector<double> mean(static_cast<std::size_t>(c.dimension()), 0.0);
    for (int i = 1; i <= c.n_points(); ++i) {
        auto p = c.point(i);
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
    for (double& m : mean) m /= static_cast<double>(c.n_points());
    return mean;
}

/// Translate so the centroid sits at the origin.
inline Configuration project_to_centroid_zero(const Configuration& c) {
    const std::vector<double> mean = centroid(c);
    Configuration out = c;
    for (int i = 1; i <= out.n_points(); ++i) {
        auto p = out.point(i);
        for (std::size_t k = 0; k < mean.size(); ++k) p[k] -= mean[k];
    }
    out.mark_projected();
    return out;
}

/// Stacked Euclidean distance |p - q| in configuration space.
inline double configuration_distance(const Configuration& p,
                                     const Configuration& q) {
    if (p.n_points() != q.n_points() || p.dimension() != q.dimension())
        throw std::invalid_argument(
            "configuration_distance: size mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.coords().size(); ++k) {
        const double d = p.coords()[k] - q.coords()[k];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace formsim
