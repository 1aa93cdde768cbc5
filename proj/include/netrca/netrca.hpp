#pragma once

#include "netrca/attribution.hpp"
#include "netrca/augmentation.hpp"
#include "netrca/core.hpp"
#include "netrca/ensemble.hpp"
#include "netrca/error.hpp"
#include "netrca/eros.hpp"
#include "netrca/eval.hpp"
#include "netrca/features.hpp"
#include "netrca/gbdt.hpp"
#include "netrca/graphrank.hpp"
#include "netrca/io.hpp"
#include "netrca/parallel.hpp"
#include "netrca/pipeline.hpp"
#include "netrca/random.hpp"
#include "netrca/ruleset.hpp"
#include "netrca/synthgen.hpp"
#include "netrca/table.hpp"
