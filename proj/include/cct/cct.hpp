#pragma once

// Umbrella header.

#include "cct/cache.hpp"
#include "cct/dataset.hpp"
#include "cct/distribution.hpp"
#include "cct/example.hpp"
#include "cct/glassbox.hpp"
#include "cct/hash.hpp"
#include "cct/http_client.hpp"
#include "cct/intervention.hpp"
#include "cct/manifest.hpp"
#include "cct/mention.hpp"
#include "cct/metrics.hpp"
#include "cct/model.hpp"
#include "cct/naturalness.hpp"
#include "cct/pipeline.hpp"
#include "cct/pos.hpp"
#include "cct/prompt.hpp"
#include "cct/records.hpp"
#include "cct/report.hpp"
#include "cct/rng.hpp"
#include "cct/simulate.hpp"
#include "cct/stemmer.hpp"
#include "cct/task.hpp"
#include "cct/wordnet.hpp"
