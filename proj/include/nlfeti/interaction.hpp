#pragma once

#include "nlfeti/kernels.hpp"
#include "nlfeti/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nlfeti {

// Uniform bucket grid over a point set for fixed-radius queries.
class BucketGrid {
public:
    BucketGrid(std::vector<Point> points, double cell);
    // Calls fn(index) for every stored point within `radius` of p.
    template <class Fn>
    void query(Point p, double radius, BallNorm norm, Fn&& fn) const
    {
        const int r = static_cast<int>(std::ceil(radius / cell_));
        const int ci = cell_x(p.x), cj = cell_y(p.y);
        for (int j = std::max(0, cj - r); j <= std::min(ny_ - 1, cj + r); ++j)
            for (int i = std::max(0, ci - r); i <= std::min(nx_ - 1, ci + r); ++i) {
                const int b = j * nx_ + i;
                for (int q = start_[b]; q < start_[b + 1]; ++q) {
                    const int idx = items_[q];
                    if (distance(points_[idx], p, norm) <= radius)
                        fn(idx);
                }
            }
    }

private:
    int cell_x(double x) const { return std::clamp(static_cast<int>(std::floor((x - lo_.x) / cell_)), 0, nx_ - 1); }
    int cell_y(double y) const { return std::clamp(static_cast<int>(std::floor((y - lo_.y) / cell_)), 0, ny_ - 1); }

    std::vector<Point> points_;
    double cell_ = 1.0;
    Point lo_;
    int nx_ = 1, ny_ = 1;
    std::vector<int> start_, items_;
};

// All element pairs that pass elements_interact, as sorted neighbour lists
// (each element is its own partner).
class InteractionIndex {
public:
    InteractionIndex(const Mesh& mesh, double delta, BallNorm norm);

    std::span<const int> partners(int e) const { return partners_.row(e); }
    int offset(int e) const { return partners_.offsets[e]; }
    std::size_t num_entries() const { return partners_.items.size(); }
    double delta() const { return delta_; }
    BallNorm norm() const { return norm_; }
    double max_slack() const { return max_slack_; }

private:
    Csr partners_;
    double delta_;
    BallNorm norm_;
    double max_slack_ = 0.0;
};

}  // namespace nlfeti
