// Copyright 2026 The chdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include "chdet/dataset.hpp"

namespace chdet {

// CDP1 sample container. Layout, all integers little-endian:
//
//   offset size
//        0    4  magic "CDP1"
//        4    4  u32 version = 1
//        8    4  u32 channels C'
//       12    4  u32 height
//       16    4  u32 width
//       20    4  u32 flags (reserved, 0)
//       24    8  u64 payload length (compressed bytes)
//       32    8  u64 metadata length
//       40    -  DEFLATE stream of img1 (C'*H*W f32 LE), img2 (same),
//                mask (H*W u8), followed by the raw UTF-8 JSON metadata
//                blob (scene_id, year_pair, index, band names).

/// Writes one sample; read_sample(write_sample(s)) is bit-identical.
void write_sample(const PatchSample& sample, const std::filesystem::path& path);

PatchSample read_sample(const std::filesystem::path& path);

} // namespace chdet
