#pragma once

#include "tte/config.hpp"
#include "tte/corpus.hpp"
#include "tte/errors.hpp"
#include "tte/estimator.hpp"
#include "tte/eval.hpp"
#include "tte/feature_key.hpp"
#include "tte/features.hpp"
#include "tte/pipeline.hpp"
#include "tte/regressors.hpp"
#include "tte/rules.hpp"
#include "tte/stats.hpp"
#include "tte/synth.hpp"
#include "tte/texpr.hpp"
#include "tte/text.hpp"
#include "tte/time.hpp"
