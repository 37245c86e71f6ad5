#pragma once

#include "collar/types.hpp"

#include <optional>
#include <vector>

namespace collar {

struct PixelCluster {
    int id = 0;
    std::vector<Pixel> pixels;  // row-major order, no duplicates

    Pixel min_pixel() const { return pixels.front(); }
    BinaryMask to_mask(int width, int height) const;
};

/// Single-linkage clustering of set pixels: two pixels share a cluster iff a
/// chain of set pixels with consecutive Euclidean gaps <= link_dist joins them.
/// Clusters are ordered by their first pixel in row-major order; ids follow
/// that order. An all-zero mask yields an empty list.
std::vector<PixelCluster> cluster_mask(const BinaryMask& mask, double link_dist);

/// Largest cluster by pixel count; ties go to the lexicographically smallest
/// minimal pixel. Throws NoDetection on an empty list.
const PixelCluster& largest_cluster(const std::vector<PixelCluster>& clusters);

/// Square structuring element of side 2*radius+1, applied `iterations` times.
BinaryMask dilate(const BinaryMask& mask, int radius, int iterations);
BinaryMask erode(const BinaryMask& mask, int radius, int iterations);
// Dilation followed by erosion with the same element.
BinaryMask close(const BinaryMask& mask, int radius, int iterations);

/// Zhang-Suen two-subiteration thinning, run to convergence.
///
/// Plain Zhang-Suen erases 2x2 blocks completely. A connected component of
/// the input that loses every pixel keeps the one pixel nearest its centroid,
/// so the skeleton always has as many 8-connected components as the input.
BinaryMask skeletonize(const BinaryMask& mask);

int count_components(const BinaryMask& mask);

/// Pixel-node graph with 8-connectivity. Nodes are in row-major order.
struct SkeletonGraph {
    std::vector<Pixel> nodes;
    std::vector<std::vector<int>> adjacency;  // sorted neighbor indices

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
    std::size_t edge_count() const;
    // Index of the node at `p`, if any.
    std::optional<int> find(Pixel p) const;
};

SkeletonGraph skeleton_graph(const BinaryMask& skeleton);

struct CentralityOptions {
    // Weight of a diagonal hop. 1.0 runs plain BFS; any other value uses
    // Dijkstra with axis-aligned hops weighted 1.
    double diagonal_weight = 1.0;
};

/// Node minimizing the sum of shortest-path distances to every other node of
/// the largest connected component (maximum closeness). Ties go to the
/// smallest (row, col). Throws NoDetection on an empty graph.
Pixel closeness_center(const SkeletonGraph& graph, const CentralityOptions& options = {});

enum class Morphology { Dilate, Close };

struct CenterParams {
    double link_dist = 10.0;
    int dilate_radius = 1;
    int dilate_iters = 1;
    Morphology morphology = Morphology::Dilate;
    double diagonal_weight = 1.0;
};

struct CenterExtraction {
    Pixel center;
    BinaryMask cluster;   // largest cluster before morphology
    BinaryMask region;    // after morphology
    BinaryMask skeleton;
    std::size_t cluster_count = 0;
};

CenterExtraction extract_center_detailed(const BinaryMask& mask, const CenterParams& params = {});

/// cluster -> largest cluster -> dilate -> skeletonize -> closeness center.
/// Throws NoDetection on an empty mask.
Pixel extract_center(const BinaryMask& mask, const CenterParams& params = {});

}  // namespace collar
