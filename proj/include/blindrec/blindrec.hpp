#pragma once

#include "blindrec/baselines.hpp"
#include "blindrec/channel.hpp"
#include "blindrec/codebook.hpp"
#include "blindrec/decode.hpp"
#include "blindrec/detect.hpp"
#include "blindrec/gf2.hpp"
#include "blindrec/harness.hpp"
#include "blindrec/recovery.hpp"
#include "blindrec/rng.hpp"
