// Copyright 2026 The qbf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace qbf {

// Philox4x32-10 block function.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter ctr, Key key);
};

// Mixes a parent stream id with a child index into a new stream id.
std::uint64_t derive_stream_id(std::uint64_t parent, std::uint64_t index);

// Accepts decimal or 0x-prefixed hex.
std::optional<std::uint64_t> parse_seed(std::string_view text);

// Counter-based stream. Block b of stream s under seed k is
// Philox(ctr = {lo(b), hi(b), lo(s), hi(s)}, key = {lo(k), hi(k)}).
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0);

  std::uint64_t next_u64();
  bool next_bit();

  // A fresh stream for child `index`; does not advance this one.
  RandomStream substream(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
  std::array<std::uint64_t, 2> words_{};
  unsigned word_pos_ = 2;
  std::uint64_t bits_ = 0;
  unsigned bits_left_ = 0;
};

}  // namespace qbf
