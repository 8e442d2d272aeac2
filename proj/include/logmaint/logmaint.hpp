#pragma once

#include "logmaint/error.hpp"
#include "logmaint/corpus_io.hpp"
#include "logmaint/porter2.hpp"
#include "logmaint/spellcorrect.hpp"
#include "logmaint/textnorm.hpp"
#include "logmaint/vectorspace.hpp"
#include "logmaint/clustering.hpp"
#include "logmaint/evaluation.hpp"
#include "logmaint/model_selection.hpp"
#include "logmaint/pipeline.hpp"
