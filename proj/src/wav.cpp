#include "overiva/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "overiva/error.hpp"

namespace overiva {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

std::int16_t to_pcm16(double sample) noexcept {
  const double x = std::clamp(sample, -1.0, 1.0) * 32768.0;
  const double r = x < 0.0 ? -std::floor(-x + 0.5) : std::floor(x + 0.5);
  return static_cast<std::int16_t>(std::clamp(r, -32768.0, 32767.0));
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(Errc::corrupt_file, path.string() + " is not RIFF/WAVE");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // A truncated data chunk is corrupt; anything else trailing is ignored.
      if (std::memcmp(chunk, "data", 4) == 0) {
        throw Error(Errc::corrupt_file, path.string() + ": truncated data chunk");
      }
      break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw Error(Errc::corrupt_file, path.string() + ": short fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible) {
        if (len < 40) throw Error(Errc::corrupt_file, path.string() + ": short extensible fmt");
        format = le16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt || data == nullptr) {
    throw Error(Errc::corrupt_file, path.string() + ": missing fmt or data chunk");
  }
  if (channels == 0 || rate == 0) throw Error(Errc::corrupt_file, path.string() + ": bad header");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw Error(Errc::unsupported_format, path.string() + ": format " + std::to_string(format) +
                                              " with " + std::to_string(bits) + " bits");
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  AudioBuffer buf(static_cast<double>(rate), channels, frames);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (n * channels + c) * width;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        const std::uint32_t u = le32(p);
        float f;
        std::memcpy(&f, &u, sizeof f);
        v = f;
      }
      if (!std::isfinite(v)) throw Error(Errc::corrupt_file, path.string() + ": non-finite sample");
      buf.channel(c)[n] = v;
    }
  }
  return buf;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf, WavFormat format) {
  if (buf.channels == 0 || buf.samples.size() != buf.channels * buf.frames) {
    throw Error(Errc::shape_mismatch, "write_wav: inconsistent buffer");
  }
  const bool pcm = format == WavFormat::pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(buf.channels * bits / 8);
  const std::uint32_t data_len = static_cast<std::uint32_t>(buf.frames * block);
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(buf.sample_rate));

  std::vector<std::uint8_t> out;
  out.reserve(58 + data_len);
  put_tag(out, "RIFF");
  put32(out, 0);  // patched below
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, pcm ? 16 : 18);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, static_cast<std::uint16_t>(buf.channels));
  put32(out, rate);
  put32(out, rate * block);
  put16(out, block);
  put16(out, bits);
  if (!pcm) {
    put16(out, 0);  // cbSize
    put_tag(out, "fact");
    put32(out, 4);
    put32(out, static_cast<std::uint32_t>(buf.frames));
  }
  put_tag(out, "data");
  put32(out, data_len);
  for (std::size_t n = 0; n < buf.frames; ++n) {
    for (std::size_t c = 0; c < buf.channels; ++c) {
      const double v = buf.channel(c)[n];
      if (pcm) {
        put16(out, static_cast<std::uint16_t>(to_pcm16(v)));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, sizeof u);
        put32(out, u);
      }
    }
  }
  const std::uint32_t riff_len = static_cast<std::uint32_t>(out.size() - 8);
  for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<std::uint8_t>((riff_len >> (8 * i)) & 0xFF);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(Errc::io_failure, "write failed for " + path.string());
}

}  // namespace overiva
