#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "djsr/image.hpp"

namespace djsr::synth {

// Procedural test textures in [0, 1]. Hard-edged patterns are supersampled
// 4x4 per pixel.

Image grating(Dims dims, double period, double angle_deg, double phase = 0.0, double contrast = 0.8);
Image checker(Dims dims, double cell, double angle_deg, double contrast = 0.8);
Image disks(Dims dims, int count, std::mt19937_64& rng);
Image smooth_noise(Dims dims, double sigma, std::mt19937_64& rng);

// Running-bond brick wall: bricks of brick_h x brick_w with a mortar gap.
Image bricks(Dims dims, int brick_h = 12, int brick_w = 24, int mortar = 2, double jitter = 0.0,
             std::uint64_t seed = 1);

// A random member of the training families (gratings, checkers, disks,
// smoothed noise and mixtures). Bricks are never produced.
Image random_texture(Dims dims, std::mt19937_64& rng);

std::vector<Image> texture_corpus(int count, Dims dims, std::uint64_t seed);

}  // namespace djsr::synth
