// Copyright 2026 The ddosguard Authors.
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


#ifndef DDOSGUARD_DDOSGUARD_HPP_
#define DDOSGUARD_DDOSGUARD_HPP_

#include "ddosguard/config.hpp"
#include "ddosguard/detector.hpp"
#include "ddosguard/error.hpp"
#include "ddosguard/harness.hpp"
#include "ddosguard/identifier.hpp"
#include "ddosguard/queue.hpp"
#include "ddosguard/stats.hpp"
#include "ddosguard/traffic.hpp"

#endif  // DDOSGUARD_DDOSGUARD_HPP_
