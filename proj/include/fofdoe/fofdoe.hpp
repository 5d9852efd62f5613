#pragma once

#include "fofdoe/basis.hpp"
#include "fofdoe/config.hpp"
#include "fofdoe/design.hpp"
#include "fofdoe/estimation.hpp"
#include "fofdoe/io.hpp"
#include "fofdoe/optimizer.hpp"
#include "fofdoe/scenarios.hpp"
#include "fofdoe/simulation.hpp"
