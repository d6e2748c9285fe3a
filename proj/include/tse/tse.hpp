// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tse/checkpoint.hpp"
#include "tse/core.hpp"
#include "tse/dataset.hpp"
#include "tse/discriminator.hpp"
#include "tse/evaluation.hpp"
#include "tse/features.hpp"
#include "tse/objectives.hpp"
#include "tse/optim.hpp"
#include "tse/resample.hpp"
#include "tse/separator.hpp"
#include "tse/speaker_encoder.hpp"
#include "tse/synthetic.hpp"
#include "tse/trainer.hpp"
#include "tse/wav.hpp"
