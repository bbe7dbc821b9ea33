#pragma once

// Data-parallel inner loops shared by the operator and solver layers.
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant selected once at startup from CPU capabilities.
// force_lane() pins a lane so tests can compare the variants directly.

#include <cstddef>
#include <span>
#include <string_view>

namespace fragsim::kernels {

enum class Lane { scalar, avx2 };

Lane active_lane() noexcept;
bool lane_supported(Lane lane) noexcept;
void force_lane(Lane lane);  // throws std::invalid_argument if unsupported here
std::string_view lane_name(Lane lane) noexcept;

// sum_i w[i] * |x[i]|        (weighted l1 accumulation)
double weighted_abs_sum(std::span<const double> w, std::span<const double> x);

// sum_i w[i] * x[i]          (weighted linear functional)
double weighted_sum(std::span<const double> w, std::span<const double> x);

// sum_i (i+1) * x[i]         (first moment of a 0-based coordinate array)
double index_moment(std::span<const double> x);

// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace fragsim::kernels
