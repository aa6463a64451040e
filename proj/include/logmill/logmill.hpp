#pragma once

#include "logmill/backend.hpp"
#include "logmill/bench.hpp"
#include "logmill/csv.hpp"
#include "logmill/dataset.hpp"
#include "logmill/embedding.hpp"
#include "logmill/engine.hpp"
#include "logmill/errors.hpp"
#include "logmill/example_pool.hpp"
#include "logmill/extractor.hpp"
#include "logmill/metrics.hpp"
#include "logmill/model.hpp"
#include "logmill/prompts.hpp"
#include "logmill/remote.hpp"
#include "logmill/responses.hpp"
#include "logmill/sha256.hpp"
#include "logmill/state.hpp"
#include "logmill/tree.hpp"
