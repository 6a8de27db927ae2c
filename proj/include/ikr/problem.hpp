#pragma once

#include "ikr/blur.hpp"
#include "ikr/psf.hpp"
#include "ikr/varpro.hpp"

#include <string>

namespace ikr {

enum class ImageSource { bundled_starfield, bundled_phantom, file };

struct ProblemSpec {
  ImageSource source = ImageSource::bundled_starfield;
  std::string path;  // for ImageSource::file (PGM, grayscale)
  int N = 64;
  PsfParams y_true{2.5, 2.5, 0.0};
  double noise_level = 1e-2;  // ||e|| / ||b_true||
  unsigned seed = 7;
};

struct GeneratedProblem {
  Vector b;
  Vector b_true;
  Vector x_true;
  Vector e;
  PsfParams y_true;
  int N = 0;
};

/// Deterministic synthetic test images in [0, 1]: a star field (soft
/// Gaussian point sources plus a bright cross-shaped satellite) and a
/// piecewise-constant phantom.
Matrix bundled_starfield(int N, unsigned seed);
Matrix bundled_phantom(int N, unsigned seed);

/// b = A(y_true) x_true + e with white Gaussian e scaled so that
/// ||e|| / ||b_true|| equals noise_level exactly; bit-reproducible for a
/// fixed spec.
GeneratedProblem generate_problem(const ProblemSpec& spec);

/// Relative reconstruction error ||x - x_true|| / ||x_true||.
double rre(const Vector& x, const Vector& x_true);

DeblurProblem to_deblur_problem(const GeneratedProblem& gen);

}  // namespace ikr
