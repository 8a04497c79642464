#pragma once

// Umbrella header for the Sylheti-Bangla dialect translation toolkit.

#include "sylcap/corpus.hpp"
#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"
#include "sylcap/evaluation.hpp"
#include "sylcap/lexicon.hpp"
#include "sylcap/llm.hpp"
#include "sylcap/metrics.hpp"
#include "sylcap/prompting.hpp"
#include "sylcap/quality.hpp"
#include "sylcap/report.hpp"
#include "sylcap/rulebook.hpp"
#include "sylcap/unicode.hpp"
