#include "collar/mask_ops.hpp"

#include "collar/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>

namespace collar {
namespace {

constexpr std::array<std::array<int, 2>, 8> kNeighbors8 = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint8_t> rank_;
};

// Separable square max/min filter. Outside pixels read as `border`.
BinaryMask square_filter(const BinaryMask& mask, int radius, bool take_max, bool border) {
    const int w = mask.width();
    const int h = mask.height();
    const auto read = [&](const BinaryMask& m, int r, int c) {
        return m.contains(r, c) ? m.at(r, c) : border;
    };
    BinaryMask horizontal(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool acc = !take_max;
            for (int d = -radius; d <= radius; ++d) {
                const bool v = read(mask, r, c + d);
                acc = take_max ? (acc || v) : (acc && v);
            }
            horizontal.set(r, c, acc);
        }
    }
    BinaryMask out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool acc = !take_max;
            for (int d = -radius; d <= radius; ++d) {
                const bool v = read(horizontal, r + d, c);
                acc = take_max ? (acc || v) : (acc && v);
            }
            out.set(r, c, acc);
        }
    }
    return out;
}

void check_morphology_args(int radius, int iterations) {
    if (radius < 1 || iterations < 1) {
        throw Error(ErrorCode::InvalidArgument, "morphology needs radius >= 1 and iterations >= 1");
    }
}

// 8-connected component labels (-1 for background), numbered in row-major
// order of first pixel.
std::vector<int> label_components(const BinaryMask& mask, int& count) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
    count = 0;
    std::vector<Pixel> stack;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask.at(r, c) || labels[static_cast<std::size_t>(r) * w + c] >= 0) continue;
            labels[static_cast<std::size_t>(r) * w + c] = count;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                for (const auto& [dr, dc] : kNeighbors8) {
                    const int rr = p.row + dr;
                    const int cc = p.col + dc;
                    if (!mask.get(rr, cc)) continue;
                    int& l = labels[static_cast<std::size_t>(rr) * w + cc];
                    if (l < 0) {
                        l = count;
                        stack.push_back({rr, cc});
                    }
                }
            }
            ++count;
        }
    }
    return labels;
}

// One Zhang-Suen subiteration; returns whether any pixel was removed.
bool thinning_pass(BinaryMask& img, bool first) {
    std::vector<Pixel> removals;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (!img.at(r, c)) continue;
            // P2..P9 clockwise from north.
            const int p2 = img.get(r - 1, c);
            const int p3 = img.get(r - 1, c + 1);
            const int p4 = img.get(r, c + 1);
            const int p5 = img.get(r + 1, c + 1);
            const int p6 = img.get(r + 1, c);
            const int p7 = img.get(r + 1, c - 1);
            const int p8 = img.get(r, c - 1);
            const int p9 = img.get(r - 1, c - 1);
            const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
            if (b < 2 || b > 6) continue;
            const int a = (!p2 && p3) + (!p3 && p4) + (!p4 && p5) + (!p5 && p6) + (!p6 && p7) +
                          (!p7 && p8) + (!p8 && p9) + (!p9 && p2);
            if (a != 1) continue;
            const bool keep = first ? (p2 && p4 && p6) || (p4 && p6 && p8)
                                    : (p2 && p4 && p8) || (p2 && p6 && p8);
            if (keep) continue;
            removals.push_back({r, c});
        }
    }
    for (const Pixel& p : removals) img.set(p.row, p.col, false);
    return !removals.empty();
}

}  // namespace

BinaryMask PixelCluster::to_mask(int width, int height) const {
    BinaryMask mask(width, height);
    for (const Pixel& p : pixels) mask.set(p.row, p.col);
    return mask;
}

std::vector<PixelCluster> cluster_mask(const BinaryMask& mask, double link_dist) {
    if (!(link_dist > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "link_dist must be positive");
    }
    const std::vector<Pixel> pixels = mask.pixels();
    if (pixels.empty()) return {};

    const int w = mask.width();
    std::vector<int> index(static_cast<std::size_t>(w) * mask.height(), -1);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        index[static_cast<std::size_t>(pixels[i].row) * w + pixels[i].col] = static_cast<int>(i);
    }

    // Forward half of the disc of radius link_dist.
    const int reach = static_cast<int>(std::floor(link_dist));
    const double limit = link_dist * link_dist;
    std::vector<std::array<int, 2>> offsets;
    for (int dr = 0; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
            if (dr == 0 && dc <= 0) continue;
            if (dr * dr + dc * dc <= limit) offsets.push_back({dr, dc});
        }
    }

    DisjointSets sets(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        for (const auto& [dr, dc] : offsets) {
            const int r = pixels[i].row + dr;
            const int c = pixels[i].col + dc;
            if (!mask.contains(r, c)) continue;
            const int j = index[static_cast<std::size_t>(r) * w + c];
            if (j >= 0) sets.unite(i, static_cast<std::size_t>(j));
        }
    }

    std::vector<PixelCluster> clusters;
    std::vector<int> slot(pixels.size(), -1);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(clusters.size());
            clusters.push_back({static_cast<int>(clusters.size()), {}});
        }
        clusters[slot[root]].pixels.push_back(pixels[i]);
    }
    return clusters;
}

const PixelCluster& largest_cluster(const std::vector<PixelCluster>& clusters) {
    if (clusters.empty()) throw Error(ErrorCode::NoDetection, "no collar pixels detected");
    const PixelCluster* best = &clusters.front();
    for (const PixelCluster& c : clusters) {
        if (c.pixels.size() > best->pixels.size() ||
            (c.pixels.size() == best->pixels.size() && c.min_pixel() < best->min_pixel())) {
            best = &c;
        }
    }
    return *best;
}

BinaryMask dilate(const BinaryMask& mask, int radius, int iterations) {
    check_morphology_args(radius, iterations);
    BinaryMask out = mask;
    for (int i = 0; i < iterations; ++i) out = square_filter(out, radius, true, false);
    return out;
}

BinaryMask erode(const BinaryMask& mask, int radius, int iterations) {
    check_morphology_args(radius, iterations);
    BinaryMask out = mask;
    for (int i = 0; i < iterations; ++i) out = square_filter(out, radius, false, true);
    return out;
}

BinaryMask close(const BinaryMask& mask, int radius, int iterations) {
    return erode(dilate(mask, radius, iterations), radius, iterations);
}

int count_components(const BinaryMask& mask) {
    int count = 0;
    label_components(mask, count);
    return count;
}

BinaryMask skeletonize(const BinaryMask& mask) {
    BinaryMask skel = mask;
    while (true) {
        const bool a = thinning_pass(skel, true);
        const bool b = thinning_pass(skel, false);
        if (!a && !b) break;
    }

    int count = 0;
    const std::vector<int> labels = label_components(mask, count);
    std::vector<bool> survived(count, false);
    std::vector<double> sum_r(count, 0.0), sum_c(count, 0.0), size(count, 0.0);
    const int w = mask.width();
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < w; ++c) {
            const int l = labels[static_cast<std::size_t>(r) * w + c];
            if (l < 0) continue;
            sum_r[l] += r;
            sum_c[l] += c;
            size[l] += 1.0;
            if (skel.at(r, c)) survived[l] = true;
        }
    }
    for (int l = 0; l < count; ++l) {
        if (survived[l]) continue;
        const double mr = sum_r[l] / size[l];
        const double mc = sum_c[l] / size[l];
        Pixel best{};
        double best_d = std::numeric_limits<double>::infinity();
        for (int r = 0; r < mask.height(); ++r) {
            for (int c = 0; c < w; ++c) {
                if (labels[static_cast<std::size_t>(r) * w + c] != l) continue;
                const double d = (r - mr) * (r - mr) + (c - mc) * (c - mc);
                if (d < best_d) {
                    best_d = d;
                    best = {r, c};
                }
            }
        }
        skel.set(best.row, best.col);
    }
    return skel;
}

std::size_t SkeletonGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& n : adjacency) twice += n.size();
    return twice / 2;
}

std::optional<int> SkeletonGraph::find(Pixel p) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), p);
    if (it == nodes.end() || *it != p) return std::nullopt;
    return static_cast<int>(it - nodes.begin());
}

SkeletonGraph skeleton_graph(const BinaryMask& skeleton) {
    SkeletonGraph g;
    g.nodes = skeleton.pixels();
    const int w = skeleton.width();
    std::vector<int> index(static_cast<std::size_t>(w) * skeleton.height(), -1);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        index[static_cast<std::size_t>(g.nodes[i].row) * w + g.nodes[i].col] = static_cast<int>(i);
    }
    g.adjacency.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (const auto& [dr, dc] : kNeighbors8) {
            const int r = g.nodes[i].row + dr;
            const int c = g.nodes[i].col + dc;
            if (skeleton.get(r, c)) g.adjacency[i].push_back(index[static_cast<std::size_t>(r) * w + c]);
        }
        std::sort(g.adjacency[i].begin(), g.adjacency[i].end());
    }
    return g;
}

Pixel closeness_center(const SkeletonGraph& graph, const CentralityOptions& options) {
    if (graph.empty()) throw Error(ErrorCode::NoDetection, "skeleton graph is empty");
    const int n = static_cast<int>(graph.size());

    // Components; the first-seen component of maximal size wins, which is the
    // one holding the smallest pixel among equals.
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> members;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(members.size());
        members.emplace_back();
        std::vector<int> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            members[id].push_back(u);
            for (int v : graph.adjacency[u]) {
                if (comp[v] < 0) {
                    comp[v] = id;
                    stack.push_back(v);
                }
            }
        }
    }
    std::size_t best_comp = 0;
    for (std::size_t c = 1; c < members.size(); ++c) {
        if (members[c].size() > members[best_comp].size()) best_comp = c;
    }
    std::vector<int> nodes = members[best_comp];
    std::sort(nodes.begin(), nodes.end());

    const bool unit = options.diagonal_weight == 1.0;
    const auto hop = [&](int u, int v) {
        const bool diagonal = graph.nodes[u].row != graph.nodes[v].row &&
                              graph.nodes[u].col != graph.nodes[v].col;
        return diagonal ? options.diagonal_weight : 1.0;
    };

    int best = nodes.front();
    double best_sum = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n);
    for (int source : nodes) {
        double total = 0.0;
        if (unit) {
            std::vector<int> hops(n, -1);
            std::queue<int> q;
            hops[source] = 0;
            q.push(source);
            std::int64_t sum = 0;
            while (!q.empty()) {
                const int u = q.front();
                q.pop();
                sum += hops[u];
                for (int v : graph.adjacency[u]) {
                    if (hops[v] < 0) {
                        hops[v] = hops[u] + 1;
                        q.push(v);
                    }
                }
            }
            total = static_cast<double>(sum);
        } else {
            std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
            using Item = std::pair<double, int>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            dist[source] = 0.0;
            pq.push({0.0, source});
            while (!pq.empty()) {
                const auto [d, u] = pq.top();
                pq.pop();
                if (d > dist[u]) continue;
                for (int v : graph.adjacency[u]) {
                    const double nd = d + hop(u, v);
                    if (nd < dist[v]) {
                        dist[v] = nd;
                        pq.push({nd, v});
                    }
                }
            }
            for (int v : nodes) total += dist[v];
        }
        if (total < best_sum) {
            best_sum = total;
            best = source;
        }
    }
    return graph.nodes[best];
}

CenterExtraction extract_center_detailed(const BinaryMask& mask, const CenterParams& params) {
    const std::vector<PixelCluster> clusters = cluster_mask(mask, params.link_dist);
    const PixelCluster& largest = largest_cluster(clusters);

    CenterExtraction out;
    out.cluster_count = clusters.size();
    out.cluster = largest.to_mask(mask.width(), mask.height());
    out.region = params.morphology == Morphology::Close
                     ? close(out.cluster, params.dilate_radius, params.dilate_iters)
                     : dilate(out.cluster, params.dilate_radius, params.dilate_iters);
    out.skeleton = skeletonize(out.region);
    out.center = closeness_center(skeleton_graph(out.skeleton), {params.diagonal_weight});
    return out;
}

Pixel extract_center(const BinaryMask& mask, const CenterParams& params) {
    return extract_center_detailed(mask, params).center;
}

}  // namespace collar
