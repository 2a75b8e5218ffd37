// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Umbrella header.

#ifndef RIS_RIS_HPP
#define RIS_RIS_HPP

#include "estimators.hpp"
#include "experiments.hpp"
#include "kernel.hpp"
#include "model.hpp"
#include "optimizers.hpp"
#include "rng.hpp"
#include "schemes.hpp"

#endif // RIS_RIS_HPP
