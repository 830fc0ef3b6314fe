#pragma once

#include "nipsqw/errors.hpp"
#include "nipsqw/evolution.hpp"
#include "nipsqw/hamiltonian.hpp"
#include "nipsqw/io.hpp"
#include "nipsqw/matrix_core.hpp"
#include "nipsqw/metric.hpp"
#include "nipsqw/n2_oracle.hpp"
#include "nipsqw/profile.hpp"
#include "nipsqw/spectrum.hpp"
#include "nipsqw/tolerances.hpp"
