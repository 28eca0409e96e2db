#pragma once

#include "gestrec/classifier.hpp"
#include "gestrec/dtw.hpp"
#include "gestrec/errors.hpp"
#include "gestrec/experiment.hpp"
#include "gestrec/geometry.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/io.hpp"
#include "gestrec/matrix.hpp"
#include "gestrec/quantizer.hpp"
#include "gestrec/rng.hpp"
#include "gestrec/streaming.hpp"
#include "gestrec/synth.hpp"
#include "gestrec/vb.hpp"
