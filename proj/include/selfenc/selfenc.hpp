#pragma once

// Umbrella header for the self-encoder library.

#include "selfenc/dataset.hpp"
#include "selfenc/eval.hpp"
#include "selfenc/fixtures.hpp"
#include "selfenc/matrix.hpp"
#include "selfenc/neighbors.hpp"
#include "selfenc/network.hpp"
#include "selfenc/rng.hpp"
#include "selfenc/self_encoder.hpp"
#include "selfenc/train.hpp"
#include "selfenc/voronoi.hpp"
#include "selfenc/warn.hpp"
