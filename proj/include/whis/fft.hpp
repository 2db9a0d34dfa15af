// Copyright 2026 The WHIS Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Thin FFTW3 wrapper. Plans are created once per size and shared; executing
// a plan on caller-owned arrays is thread-safe in FFTW, planning is not, so
// planning is serialized behind a process-wide mutex.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "whis/errors.hpp"

namespace whis::fft {

using Complex = std::complex<double>;

namespace detail {

struct PlanSet {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c_fwd = nullptr;
  fftw_plan c2c_inv = nullptr;
  ~PlanSet() {
    for (fftw_plan p : {r2c, c2r, c2c_fwd, c2c_inv}) {
      if (p != nullptr) fftw_destroy_plan(p);
    }
  }
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline const PlanSet& plans_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<PlanSet>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  auto set = std::make_unique<PlanSet>();
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<double> r(n);
  std::vector<Complex> c(n / 2 + 1);
  std::vector<Complex> a(n), b(n);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  auto* ap = reinterpret_cast<fftw_complex*>(a.data());
  auto* bp = reinterpret_cast<fftw_complex*>(b.data());
  set->r2c = fftw_plan_dft_r2c_1d(ni, r.data(), cp, flags);
  set->c2r = fftw_plan_dft_c2r_1d(ni, cp, r.data(), flags);
  set->c2c_fwd = fftw_plan_dft_1d(ni, ap, bp, FFTW_FORWARD, flags);
  set->c2c_inv = fftw_plan_dft_1d(ni, ap, bp, FFTW_BACKWARD, flags);
  if (!set->r2c || !set->c2r || !set->c2c_fwd || !set->c2c_inv) {
    throw ProcessingError("FFTW planning failed");
  }
  return *cache.emplace(n, std::move(set)).first->second;
}

}  // namespace detail

// Real transform of size n; spectra carry n/2+1 bins. inverse() is scaled
// by 1/n so forward followed by inverse is the identity.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), plans_(&detail::plans_for(n)) {
    if (n < 2) throw DomainError("RealFft: size must be >= 2");
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out) const {
    check(in.size() == n_ && out.size() == bins());
    // r2c does not modify its input; the const_cast is for the C API only.
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  std::vector<Complex> forward(std::span<const double> in) const {
    std::vector<Complex> out(bins());
    forward(in, out);
    return out;
  }

  void inverse(std::span<const Complex> in, std::span<double> out) const {
    check(in.size() == bins() && out.size() == n_);
    std::vector<Complex> scratch(in.begin(), in.end());  // c2r clobbers input
    fftw_execute_dft_c2r(plans_->c2r,
                         reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
    const double scale = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= scale;
  }

  std::vector<double> inverse(std::span<const Complex> in) const {
    std::vector<double> out(n_);
    inverse(in, out);
    return out;
  }

 private:
  static void check(bool ok) {
    if (!ok) throw DomainError("RealFft: buffer size mismatch");
  }

  std::size_t n_;
  const detail::PlanSet* plans_;
};

class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n) : n_(n), plans_(&detail::plans_for(n)) {
    if (n < 2) throw DomainError("ComplexFft: size must be >= 2");
  }

  std::size_t size() const { return n_; }

  std::vector<Complex> forward(std::span<const Complex> in) const {
    return run(plans_->c2c_fwd, in, 1.0);
  }

  std::vector<Complex> inverse(std::span<const Complex> in) const {
    return run(plans_->c2c_inv, in, 1.0 / static_cast<double>(n_));
  }

 private:
  std::vector<Complex> run(fftw_plan plan, std::span<const Complex> in,
                           double scale) const {
    if (in.size() != n_) throw DomainError("ComplexFft: size mismatch");
    std::vector<Complex> src(in.begin(), in.end());
    std::vector<Complex> out(n_);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    if (scale != 1.0) {
      for (Complex& v : out) v *= scale;
    }
    return out;
  }

  std::size_t n_;
  const detail::PlanSet* plans_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace whis::fft
