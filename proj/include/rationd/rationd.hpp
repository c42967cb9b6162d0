#pragma once

#include "rationd/budget.hpp"
#include "rationd/decompose.hpp"
#include "rationd/error.hpp"
#include "rationd/grid.hpp"
#include "rationd/instance.hpp"
#include "rationd/matching.hpp"
#include "rationd/online.hpp"
#include "rationd/oracle.hpp"
#include "rationd/perturbation.hpp"
#include "rationd/rational.hpp"
#include "rationd/selection.hpp"
#include "rationd/serial.hpp"
#include "rationd/stable_matching.hpp"
#include "rationd/validity.hpp"
