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

// RIFF/WAVE reading and writing. Integer PCM 16/24/32 and IEEE float 32/64,
// including WAVE_FORMAT_EXTENSIBLE headers. Multi-channel input is mixed down
// to the mean of its channels.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "whis/errors.hpp"
#include "whis/signal.hpp"

namespace whis {

class WavError : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

enum class SampleFormat { kPcm16, kPcm24, kPcm32, kFloat32, kFloat64 };

struct WavInfo {
  std::uint16_t channels = 1;
  std::uint32_t fs = 0;
  SampleFormat format = SampleFormat::kPcm16;
  bool downmixed = false;
};

namespace detail {

inline std::uint32_t rd_u32(const std::uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}
inline std::uint16_t rd_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void wr_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void wr_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline int bytes_per_sample(SampleFormat f) {
  switch (f) {
    case SampleFormat::kPcm16: return 2;
    case SampleFormat::kPcm24: return 3;
    case SampleFormat::kPcm32: return 4;
    case SampleFormat::kFloat32: return 4;
    case SampleFormat::kFloat64: return 8;
  }
  return 0;
}

inline double read_sample(const std::uint8_t* p, SampleFormat f) {
  switch (f) {
    case SampleFormat::kPcm16:
      return static_cast<std::int16_t>(rd_u16(p)) / 32768.0;
    case SampleFormat::kPcm24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case SampleFormat::kPcm32:
      return static_cast<std::int32_t>(rd_u32(p)) / 2147483648.0;
    case SampleFormat::kFloat32: {
      const std::uint32_t u = rd_u32(p);
      float v;
      std::memcpy(&v, &u, 4);
      return v;
    }
    case SampleFormat::kFloat64: {
      std::uint64_t u = rd_u32(p) | (std::uint64_t(rd_u32(p + 4)) << 32);
      double v;
      std::memcpy(&v, &u, 8);
      return v;
    }
  }
  return 0.0;
}

template <typename Int>
Int quantize(double v, double scale) {
  const double q = std::round(std::clamp(v, -1.0, 1.0) * scale);
  return static_cast<Int>(std::clamp(q, -scale, scale - 1.0));
}

}  // namespace detail

struct WavData {
  CalibratedSignal signal;
  WavInfo info;
};

inline WavData decode_wav(const std::vector<std::uint8_t>& b,
                          double spl_ref = kDefaultSplRef) {
  using detail::rd_u16;
  using detail::rd_u32;
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw WavError("wav: not a RIFF/WAVE stream");
  }
  WavInfo info;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint8_t* ck = b.data() + pos;
    const std::size_t len = rd_u32(ck + 4);
    const std::size_t avail = b.size() - pos - 8;
    if (std::memcmp(ck, "fmt ", 4) == 0) {
      if (len < 16 || len > avail) throw WavError("wav: truncated fmt chunk");
      std::uint16_t tag = rd_u16(ck + 8);
      info.channels = rd_u16(ck + 10);
      info.fs = rd_u32(ck + 12);
      const std::uint16_t bits = rd_u16(ck + 22);
      if (tag == 0xFFFE) {
        if (len < 40) throw WavError("wav: truncated extensible fmt chunk");
        tag = rd_u16(ck + 8 + 24);  // first two bytes of the subformat GUID
      }
      if (tag == 1 && bits == 16) {
        info.format = SampleFormat::kPcm16;
      } else if (tag == 1 && bits == 24) {
        info.format = SampleFormat::kPcm24;
      } else if (tag == 1 && bits == 32) {
        info.format = SampleFormat::kPcm32;
      } else if (tag == 3 && bits == 32) {
        info.format = SampleFormat::kFloat32;
      } else if (tag == 3 && bits == 64) {
        info.format = SampleFormat::kFloat64;
      } else {
        throw WavError("wav: unsupported codec (format tag " +
                       std::to_string(tag) + ", " + std::to_string(bits) +
                       " bits)");
      }
      if (info.channels == 0) throw WavError("wav: zero channels");
      have_fmt = true;
    } else if (std::memcmp(ck, "data", 4) == 0) {
      data = ck + 8;
      data_len = std::min(len, avail);  // tolerate streamed length fields
    }
    pos += 8 + len + (len & 1);
  }
  if (!have_fmt) throw WavError("wav: missing fmt chunk");
  if (data == nullptr) throw WavError("wav: missing data chunk");

  const int bps = detail::bytes_per_sample(info.format);
  const std::size_t frame_bytes = static_cast<std::size_t>(bps) * info.channels;
  const std::size_t n = data_len / frame_bytes;
  WavData out;
  out.signal.fs = info.fs;
  out.signal.spl_ref = spl_ref;
  out.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < info.channels; ++c) {
      acc += detail::read_sample(data + i * frame_bytes + c * bps, info.format);
    }
    out.signal.samples[i] = acc / info.channels;
  }
  info.downmixed = info.channels > 1;
  out.info = info;
  return out;
}

inline std::vector<std::uint8_t> encode_wav(const CalibratedSignal& s,
                                            SampleFormat fmt = SampleFormat::kFloat32) {
  using detail::wr_u16;
  using detail::wr_u32;
  const int bps = detail::bytes_per_sample(fmt);
  const bool is_float = fmt == SampleFormat::kFloat32 || fmt == SampleFormat::kFloat64;
  const std::uint64_t data_len = static_cast<std::uint64_t>(s.samples.size()) * bps;
  if (data_len > 0xFFFFFFF0ull) throw WavError("wav: signal too long for RIFF");
  const auto fs = static_cast<std::uint32_t>(std::lround(s.fs));
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_len + (is_float ? 12 : 0));
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  wr_u32(b, 0);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  wr_u32(b, is_float ? 18 : 16);
  wr_u16(b, is_float ? 3 : 1);
  wr_u16(b, 1);
  wr_u32(b, fs);
  wr_u32(b, fs * bps);
  wr_u16(b, static_cast<std::uint16_t>(bps));
  wr_u16(b, static_cast<std::uint16_t>(8 * bps));
  if (is_float) {
    wr_u16(b, 0);
    b.insert(b.end(), {'f', 'a', 'c', 't'});
    wr_u32(b, 4);
    wr_u32(b, static_cast<std::uint32_t>(s.samples.size()));
  }
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  wr_u32(b, static_cast<std::uint32_t>(data_len));
  for (double v : s.samples) {
    switch (fmt) {
      case SampleFormat::kPcm16:
        wr_u16(b, static_cast<std::uint16_t>(detail::quantize<std::int16_t>(v, 32768.0)));
        break;
      case SampleFormat::kPcm24: {
        const auto q = static_cast<std::uint32_t>(detail::quantize<std::int32_t>(v, 8388608.0));
        b.push_back(static_cast<std::uint8_t>(q));
        b.push_back(static_cast<std::uint8_t>(q >> 8));
        b.push_back(static_cast<std::uint8_t>(q >> 16));
        break;
      }
      case SampleFormat::kPcm32:
        wr_u32(b, static_cast<std::uint32_t>(detail::quantize<std::int32_t>(v, 2147483648.0)));
        break;
      case SampleFormat::kFloat32: {
        const auto f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        wr_u32(b, u);
        break;
      }
      case SampleFormat::kFloat64: {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        wr_u32(b, static_cast<std::uint32_t>(u));
        wr_u32(b, static_cast<std::uint32_t>(u >> 32));
        break;
      }
    }
  }
  if (data_len & 1) b.push_back(0);
  const auto riff = static_cast<std::uint32_t>(b.size() - 8);
  for (int i = 0; i < 4; ++i) b[4 + i] = static_cast<std::uint8_t>(riff >> (8 * i));
  return b;
}

inline WavData load_wav(const std::string& path,
                        double spl_ref = kDefaultSplRef) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WavError("wav: cannot open " + path);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
  try {
    return decode_wav(b, spl_ref);
  } catch (const WavError& e) {
    throw WavError(path + ": " + e.what());
  }
}

inline void save_wav(const CalibratedSignal& s, const std::string& path,
                     SampleFormat fmt = SampleFormat::kFloat32) {
  const auto b = encode_wav(s, fmt);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw WavError("wav: cannot write " + path);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw WavError("wav: write failed for " + path);
}

}  // namespace whis
