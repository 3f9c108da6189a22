// src/audio.cc

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "breathid/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "breathid/error.h"

namespace breathid {

namespace {

uint32_t ReadU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string *out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string *out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

int16_t ToPcm16(double x) {
  double v = std::round(x * 32768.0);
  v = std::clamp(v, -32768.0, 32767.0);
  return static_cast<int16_t>(v);
}

}  // namespace

Waveform LoadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open WAV file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kFormat, "not a RIFF/WAVE file" + where);

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    uint32_t size = ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size())
      Fail(ErrorCode::kFormat, "truncated WAV chunk" + where);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) Fail(ErrorCode::kFormat, "short fmt chunk" + where);
      format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Fail(ErrorCode::kFormat, "data chunk before fmt" + where);
      if (format != 1 || bits != 16)
        Fail(ErrorCode::kFormat, "unsupported encoding (need 16-bit PCM)" + where);
      if (channels != 1)
        Fail(ErrorCode::kFormat, "unsupported channel count " +
                                     std::to_string(channels) + where);
      if (rate == 0) Fail(ErrorCode::kFormat, "zero sample rate" + where);
      Waveform wave;
      wave.sample_rate = static_cast<int>(rate);
      wave.samples.resize(size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        auto v = static_cast<int16_t>(ReadU16(bytes.data() + body + 2 * i));
        wave.samples[i] = v / 32768.0;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  Fail(ErrorCode::kFormat, "no data chunk" + where);
}

void WriteWav(const std::filesystem::path &path, const Waveform &wave) {
  Require(wave.sample_rate > 0, "WriteWav: sample rate must be positive");
  const auto data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, 1);  // PCM
  PutU16(&out, 1);  // mono
  PutU32(&out, static_cast<uint32_t>(wave.sample_rate));
  PutU32(&out, static_cast<uint32_t>(wave.sample_rate) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_bytes);
  for (double x : wave.samples) PutU16(&out, static_cast<uint16_t>(ToPcm16(x)));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) Fail(ErrorCode::kIo, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

Waveform QuantizeToPcm16(const Waveform &wave) {
  Waveform q = wave;
  for (double &x : q.samples) x = ToPcm16(x) / 32768.0;
  return q;
}

Waveform EnergyNormalize(const Waveform &wave) {
  Require(!wave.samples.empty(), "EnergyNormalize: empty input");
  double sum_sq = 0.0;
  for (double x : wave.samples) sum_sq += x * x;
  if (sum_sq == 0.0) Fail(ErrorCode::kInvalidArgument, "silent input");
  const double gain = 1.0 / std::sqrt(sum_sq / wave.samples.size());
  Waveform out = wave;
  for (double &x : out.samples) x *= gain;
  return out;
}

FrameLayout ComputeFrameLayout(std::size_t num_samples, int sample_rate,
                               double frame_ms, double hop_ms) {
  Require(sample_rate > 0, "sample rate must be positive");
  Require(hop_ms > 0.0 && hop_ms <= frame_ms,
          "frame parameters need 0 < hop_ms <= frame_ms");
  FrameLayout layout;
  layout.frame_length =
      static_cast<std::size_t>(std::lround(frame_ms * sample_rate / 1000.0));
  Require(layout.frame_length > 0, "frame length rounds to zero samples");
  if (num_samples < layout.frame_length)
    Fail(ErrorCode::kInvalidArgument, "input too short");

  const double hop_samples = hop_ms * sample_rate / 1000.0;
  std::size_t covered = 0;
  for (std::size_t t = 0;; ++t) {
    auto start = static_cast<std::size_t>(std::llround(t * hop_samples));
    if (start + layout.frame_length > num_samples) {
      if (covered < num_samples) layout.starts.push_back(start);
      break;
    }
    layout.starts.push_back(start);
    covered = start + layout.frame_length;
  }
  return layout;
}

std::vector<std::vector<double>> FrameSignal(const Waveform &wave,
                                             double frame_ms, double hop_ms) {
  FrameLayout layout = ComputeFrameLayout(wave.samples.size(), wave.sample_rate,
                                          frame_ms, hop_ms);
  std::vector<std::vector<double>> frames;
  frames.reserve(layout.NumFrames());
  for (std::size_t start : layout.starts) {
    std::vector<double> frame(layout.frame_length, 0.0);
    std::size_t end = std::min(start + layout.frame_length, wave.samples.size());
    std::copy(wave.samples.begin() + start, wave.samples.begin() + end,
              frame.begin());
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace breathid
