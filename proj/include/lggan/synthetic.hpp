#pragma once

#include "lggan/graph.hpp"
#include "lggan/rng.hpp"

namespace lggan {

// Two planted classes, alternating 0, 1, 0, ...
//   class 0: one G(n, p_in) community, node labels uniform over {0, 1}
//   class 1: two equal blocks, p_in inside and p_out across, labelled by block
// n is uniform in [min_n, max_n]; isolated nodes are pruned.
GraphDataset planted_two_class(int count, int min_n, int max_n, Rng& rng, double p_in = 0.7,
                               double p_out = 0.05);

// Paths of length uniform in [min_len, max_len] with two marked nodes
// (labels 1 and 2, everything else 0). Class 0 puts the marks `near` edges
// apart, class 1 `far`. Node order is shuffled.
GraphDataset marker_paths(int count, int min_len, int max_len, int near, int far, Rng& rng);

}  // namespace lggan
