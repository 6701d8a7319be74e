#pragma once

#include "superrag/error.hpp"
#include "superrag/metrics.hpp"
#include "superrag/lru_cache.hpp"
#include "superrag/tuning.hpp"
#include "superrag/text.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/instruct.hpp"
#include "superrag/workload.hpp"
#include "superrag/pipeline.hpp"
#include "superrag/orchestrator.hpp"
#include "superrag/simulator.hpp"
#include "superrag/config.hpp"
