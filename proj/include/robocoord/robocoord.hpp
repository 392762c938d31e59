/*
 * Copyright (C) 2026 The robocoord Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef ROBOCOORD__ROBOCOORD_HPP
#define ROBOCOORD__ROBOCOORD_HPP

#include "config.hpp"
#include "coordination.hpp"
#include "gp.hpp"
#include "io.hpp"
#include "nelder_mead.hpp"
#include "sim.hpp"
#include "trajectory.hpp"
#include "uncertainty.hpp"

#endif // ROBOCOORD__ROBOCOORD_HPP
