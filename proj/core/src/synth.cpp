#include "sparsex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "sparsex/matrix_io.hpp"
#include "sparsex/rng.hpp"

namespace sparsex {
namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string ProblemInstance::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto& m = x.entries();
  h = fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
  h = fnv1a(y.data(), sizeof(double) * static_cast<std::size_t>(y.size()), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemInstance generate_problem(const ProblemParams& params) {
  const Index n = params.n;
  const Index d = params.d;
  const Index k = params.k;
  if (n < 1 || d < 1) throw ContractError("generate_problem: n and d must be positive");
  if (k > d) throw ContractError("generate_problem: k must not exceed d");
  Rng rng(params.seed);

  std::vector<Index> positions(d);
  std::iota(positions.begin(), positions.end(), Index{0});
  for (Index s = 0; s < k; ++s) {
    const auto pick = s + static_cast<Index>(rng.uniform_index(d - s));
    std::swap(positions[s], positions[pick]);
  }
  positions.resize(k);
  std::vector<double> values(k);
  for (Index s = 0; s < k; ++s) {
    const double g = rng.normal();
    values[s] = g + (g < 0.0 ? -0.1 : 0.1);
  }

  RowMajorMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector column(static_cast<Eigen::Index>(n));
  for (Index j = 0; j < d; ++j) {
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < column.size(); ++i) column[i] = rng.normal();
      norm = column.norm();
    } while (norm == 0.0);
    m.col(static_cast<Eigen::Index>(j)) = column / norm;
  }

  SparseIterate w_star(d, positions, values);
  DesignMatrix x(std::move(m));
  Vector signal = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Index s = 0; s < w_star.nnz(); ++s) {
    signal += w_star.coefficients()[s] * x.col(w_star.support()[s]);
  }
  const double sigma2 = signal.squaredNorm() / static_cast<double>(n) * std::pow(10.0, -params.snr_db / 10.0);
  const double sigma = std::sqrt(sigma2);
  Vector y = signal;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();

  return ProblemInstance{std::move(x), std::move(y), std::move(w_star), params, sigma};
}

std::vector<Index> thresholded_support(const SparseIterate& w, double gamma) {
  std::vector<Index> out;
  for (Index s = 0; s < w.nnz(); ++s) {
    if (std::abs(w.coefficients()[s]) > gamma) out.push_back(w.support()[s]);
  }
  return out;
}

double f_measure(const SparseIterate& w_star, const SparseIterate& w_hat, double gamma) {
  if (w_star.dim() != w_hat.dim()) throw ContractError("f_measure: dimension mismatch");
  const auto a = thresholded_support(w_star, gamma);
  const auto b = thresholded_support(w_hat, gamma);
  if (a.empty() && b.empty()) return 1.0;
  std::vector<Index> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(a.size() + b.size());
}

void export_instance(const ProblemInstance& instance, const std::filesystem::path& prefix) {
  const std::string base = prefix.string();
  io::write_sxgm(base + ".X.sxgm", instance.x.entries());
  RowMajorMatrix y(instance.y.size(), 1);
  y.col(0) = instance.y;
  io::write_sxgm(base + ".y.sxgm", y);

  std::ofstream meta(base + ".meta");
  if (!meta) throw std::runtime_error("cannot open " + base + ".meta");
  meta.precision(17);
  const auto& p = instance.params;
  meta << "n = " << p.n << "\nd = " << p.d << "\nk = " << p.k << "\nsnr = " << p.snr_db << "\nseed = " << p.seed
       << "\nsigma_e = " << instance.sigma_e << "\nhash = " << instance.hash() << "\nsupport = ";
  const auto& w = instance.w_star;
  for (Index s = 0; s < w.nnz(); ++s) meta << (s ? "," : "") << w.support()[s];
  meta << "\ncoefficients = ";
  for (Index s = 0; s < w.nnz(); ++s) meta << (s ? "," : "") << w.coefficients()[s];
  meta << '\n';
}

}  // namespace sparsex
