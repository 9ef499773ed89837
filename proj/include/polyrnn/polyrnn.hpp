#pragma once

#include "polyrnn/linalg.hpp"
#include "polyrnn/rnn.hpp"
#include "polyrnn/calculus.hpp"
#include "polyrnn/primitives.hpp"
#include "polyrnn/powers.hpp"
#include "polyrnn/polynomial.hpp"
#include "polyrnn/harness.hpp"
