#include "collar/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

namespace collar {
namespace {

constexpr std::size_t kLeafSize = 8;

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!points_.empty()) root_ = build(0, points_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
        Vec3 lo = points_[order_[begin]];
        Vec3 hi = lo;
        for (std::size_t i = begin; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        Vec3 extent = hi - lo;
        int dim = 0;
        extent.maxCoeff(&dim);
        if (extent[dim] > 0.0) {
            const std::size_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](std::size_t a, std::size_t b) {
                                 const double pa = points_[a][dim];
                                 const double pb = points_[b][dim];
                                 return pa < pb || (pa == pb && a < b);
                             });
            node.split_dim = dim;
            node.split = points_[order_[mid]][dim];
            const int id = static_cast<int>(nodes_.size());
            nodes_.push_back(node);
            const int left = build(begin, mid);
            const int right = build(mid, end);
            nodes_[id].left = left;
            nodes_[id].right = right;
            return id;
        }
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
}

std::vector<std::size_t> KdTree::knn(const Vec3& query, std::size_t k) const {
    k = std::min(k, points_.size());
    if (k == 0) return {};

    using Entry = std::pair<double, std::size_t>;  // (squared distance, index)
    std::priority_queue<Entry> heap;                // worst on top

    const auto visit = [&](auto&& self, int id) -> void {
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = order_[i];
                const Entry e{(points_[idx] - query).squaredNorm(), idx};
                if (heap.size() < k) {
                    heap.push(e);
                } else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            return;
        }
        const double diff = query[node.split_dim] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        self(self, near);
        if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
    };
    visit(visit, root_);

    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = heap.top().second;
        heap.pop();
    }
    return out;
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
    std::vector<std::size_t> out;
    if (root_ < 0) return out;
    const double r2 = radius * radius;
    const auto visit = [&](auto&& self, int id) -> void {
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                if ((points_[order_[i]] - query).squaredNorm() <= r2) out.push_back(order_[i]);
            }
            return;
        }
        const double diff = query[node.split_dim] - node.split;
        if (diff <= radius) self(self, node.left);
        if (diff >= -radius) self(self, node.right);
    };
    visit(visit, root_);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t KdTree::count_within(const Vec3& query, double radius, std::size_t limit) const {
    std::size_t count = 0;
    if (root_ < 0) return 0;
    const double r2 = radius * radius;
    const auto visit = [&](auto&& self, int id) -> void {
        if (count >= limit) return;
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::size_t i = node.begin; i < node.end && count < limit; ++i) {
                if ((points_[order_[i]] - query).squaredNorm() <= r2) ++count;
            }
            return;
        }
        const double diff = query[node.split_dim] - node.split;
        if (diff <= radius) self(self, node.left);
        if (diff >= -radius) self(self, node.right);
    };
    visit(visit, root_);
    return count;
}

}  // namespace collar
