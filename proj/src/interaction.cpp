#include "nlfeti/interaction.hpp"

#include <algorithm>

namespace nlfeti {

BucketGrid::BucketGrid(std::vector<Point> points, double cell) : points_(std::move(points)), cell_(cell)
{
    if (points_.empty()) {
        start_.assign(2, 0);
        return;
    }
    Point hi = points_[0];
    lo_ = points_[0];
    for (const Point& p : points_) {
        lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    nx_ = std::max(1, static_cast<int>(std::floor((hi.x - lo_.x) / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::floor((hi.y - lo_.y) / cell_)) + 1);
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<int> bucket(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k) {
        bucket[k] = cell_y(points_[k].y) * nx_ + cell_x(points_[k].x);
        ++start_[bucket[k] + 1];
    }
    for (std::size_t b = 0; b + 1 < start_.size(); ++b)
        start_[b + 1] += start_[b];
    items_.resize(points_.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < points_.size(); ++k)
        items_[fill[bucket[k]]++] = static_cast<int>(k);
}

InteractionIndex::InteractionIndex(const Mesh& mesh, double delta, BallNorm norm) : delta_(delta), norm_(norm)
{
    const int ne = mesh.num_elements();
    std::vector<Point> bary(ne);
    double max_radius = 0.0, max_diam = 0.0;
    for (int e = 0; e < ne; ++e) {
        const Triangle t = mesh.triangle(e);
        bary[e] = barycenter(t);
        max_radius = std::max(max_radius, barycenter_radius(t, norm));
        max_diam = std::max(max_diam, diameter(t, norm));
    }
    max_slack_ = std::max(max_diam, 2.0 * max_radius);
    const double cutoff = delta + max_slack_ + 1e-12 * delta;
    BucketGrid grid(bary, cutoff);
    std::vector<int> list;
    for (int e = 0; e < ne; ++e) {
        list.clear();
        const Triangle te = mesh.triangle(e);
        grid.query(bary[e], cutoff, norm, [&](int f) {
            if (elements_interact(te, mesh.triangle(f), delta, norm))
                list.push_back(f);
        });
        std::sort(list.begin(), list.end());
        partners_.items.insert(partners_.items.end(), list.begin(), list.end());
        partners_.offsets.push_back(static_cast<int>(partners_.items.size()));
    }
}

}  // namespace nlfeti
