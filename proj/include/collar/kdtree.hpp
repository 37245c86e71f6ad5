#pragma once

#include "collar/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace collar {

/// Exact 3-d tree over a fixed point set. Queries return indices into the
/// construction order; distance ties resolve to the lower index.
class KdTree {
public:
    explicit KdTree(std::span<const Vec3> points);

    std::size_t size() const { return points_.size(); }

    // min(k, size()) nearest indices, nearest first.
    std::vector<std::size_t> knn(const Vec3& query, std::size_t k) const;

    // Indices within `radius` (inclusive), ascending.
    std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;

    // Number of points within `radius`, stopping early once `limit` is reached.
    std::size_t count_within(const Vec3& query, double radius, std::size_t limit) const;

private:
    struct Node {
        int split_dim = -1;  // -1 for a leaf
        double split = 0.0;
        std::size_t begin = 0;
        std::size_t end = 0;
        int left = -1;
        int right = -1;
    };

    int build(std::size_t begin, std::size_t end);

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace collar
