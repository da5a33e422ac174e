#pragma once

#include "dircom/bivariate.hpp"
#include "dircom/detect.hpp"
#include "dircom/edge_list.hpp"
#include "dircom/error.hpp"
#include "dircom/graph.hpp"
#include "dircom/markov.hpp"
#include "dircom/measures.hpp"
#include "dircom/sbm.hpp"
#include "dircom/stats.hpp"
#include "dircom/symmetrize.hpp"
#include "dircom/version.hpp"
