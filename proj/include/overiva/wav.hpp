#pragma once

#include <cstdint>
#include <filesystem>

#include "overiva/audio.hpp"

namespace overiva {

enum class WavFormat { pcm16, float32 };

// RIFF/WAVE reader for PCM16 and IEEE float32 (plain or WAVE_FORMAT_EXTENSIBLE).
// PCM16 samples are divided by 32768.
AudioBuffer read_wav(const std::filesystem::path& path);

// PCM16 output clamps to [-1, 1], scales by 32768, rounds half away from zero
// and saturates at 32767.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf, WavFormat format);

std::int16_t to_pcm16(double sample) noexcept;

}  // namespace overiva
