/*
Copyright 2026 The mttkrp-lab Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include "mttkrp/bounds.hpp"
#include "mttkrp/collectives.hpp"
#include "mttkrp/common.hpp"
#include "mttkrp/grid.hpp"
#include "mttkrp/io.hpp"
#include "mttkrp/memmodel.hpp"
#include "mttkrp/oracle.hpp"
#include "mttkrp/parallel.hpp"
#include "mttkrp/planner.hpp"
#include "mttkrp/random.hpp"
#include "mttkrp/sequential.hpp"
#include "mttkrp/tensor.hpp"
