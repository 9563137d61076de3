// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The semsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Content digests for run manifests.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace semsim {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// fnv1a64 as 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);

}  // namespace semsim
