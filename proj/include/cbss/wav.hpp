// cbss/wav.hpp

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

// 16-bit PCM little-endian RIFF/WAVE, interleaved channels. No other formats.
// Samples map to [-1, 1) through division by 32768; writing rounds and clamps,
// so write-then-read is lossless for amplitudes already quantized to 16 bits.

#ifndef CBSS_WAV_HPP_
#define CBSS_WAV_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/signal.hpp"

namespace cbss {

namespace wav_detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void push_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}
inline void push_u16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

}  // namespace wav_detail

inline MultichannelSignal read_wav(const std::string& path) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("read_wav: not a RIFF/WAVE file: " + path);

  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data_ptr = nullptr;
  std::uint32_t data_len = 0;

  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t chunk_len = read_u32(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size())
      throw FormatError("read_wav: truncated chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw FormatError("read_wav: malformed fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_ptr = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word aligned
  }
  if (!have_fmt || data_ptr == nullptr)
    throw FormatError("read_wav: missing fmt or data chunk in " + path);
  if (format != 1) throw FormatError("read_wav: only PCM supported");
  if (bits != 16) throw FormatError("read_wav: only 16-bit samples supported");
  if (channels == 0 || rate == 0) throw FormatError("read_wav: malformed header");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t n_frames = data_len / frame_bytes;
  MultichannelSignal sig(channels, n_frames, static_cast<int>(rate));
  for (std::size_t n = 0; n < n_frames; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* s = data_ptr + (n * channels + c) * 2;
      std::int16_t v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
      sig.samples[c][n] = static_cast<Real>(v) / 32768.0;
    }
  return sig;
}

inline void write_wav(const std::string& path, const MultichannelSignal& sig) {
  using namespace wav_detail;
  sig.validate();
  const std::size_t channels = sig.channels();
  const std::size_t n_frames = sig.length();
  const std::uint32_t data_len = static_cast<std::uint32_t>(n_frames * channels * 2);

  std::vector<unsigned char> bytes;
  bytes.reserve(44 + data_len);
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  push_u32(bytes, 36 + data_len);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E'});
  bytes.insert(bytes.end(), {'f', 'm', 't', ' '});
  push_u32(bytes, 16);
  push_u16(bytes, 1);  // PCM
  push_u16(bytes, static_cast<std::uint16_t>(channels));
  push_u32(bytes, static_cast<std::uint32_t>(sig.sample_rate));
  push_u32(bytes, static_cast<std::uint32_t>(sig.sample_rate * channels * 2));
  push_u16(bytes, static_cast<std::uint16_t>(channels * 2));
  push_u16(bytes, 16);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  push_u32(bytes, data_len);
  for (std::size_t n = 0; n < n_frames; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      Real x = sig.samples[c][n] * 32768.0;
      long v = std::lround(x);
      v = std::clamp(v, -32768l, 32767l);
      push_u16(bytes, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("write_wav: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write_wav: short write to " + path);
}

}  // namespace cbss

#endif  // CBSS_WAV_HPP_
