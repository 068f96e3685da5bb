// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "kle/data_io.hpp"
#include "kle/ensemble.hpp"
#include "kle/error.hpp"
#include "kle/hilbert_space.hpp"
#include "kle/kle_engine.hpp"
#include "kle/serialize.hpp"
#include "kle/vector_field.hpp"
