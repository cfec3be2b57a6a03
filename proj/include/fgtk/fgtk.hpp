#pragma once

#include "fgtk/bethe.hpp"
#include "fgtk/common.hpp"
#include "fgtk/csv.hpp"
#include "fgtk/functionals.hpp"
#include "fgtk/graph.hpp"
#include "fgtk/mc.hpp"
#include "fgtk/model.hpp"
#include "fgtk/nishimori.hpp"
#include "fgtk/oracle.hpp"
#include "fgtk/pinning.hpp"
#include "fgtk/population.hpp"
#include "fgtk/rng.hpp"
#include "fgtk/simplex.hpp"
#include "fgtk/thresholds.hpp"
#include "fgtk/zoo.hpp"
