#pragma once

#include "xrkhs/recon.hpp"

namespace xrkhs {

// Filtered backprojection baseline: plain |w| ramp (no apodization), linear
// detector interpolation during backprojection. The sinogram mesh must be
// uniformly spaced. intensity_scale is a documented global factor applied to
// the output; RMSE comparisons here use 1 for both methods.
struct FbpConfig {
  int pad_factor = 2;  // power of two; FFT length is pad_factor * M
  double intensity_scale = 1.0;
};

void validate(const FbpConfig& cfg);

// Per angle: zero-pad the detector row, FFT, multiply by |w|, inverse FFT;
// then backproject onto pixel centers with the 1/(2N) angle measure (angles
// may cover [0, pi) or [0, 2 pi); the constant is the same).
ImageRaster fbp_reconstruct(const Sinogram& sino, int side,
                            const FbpConfig& cfg = {});

}  // namespace xrkhs
