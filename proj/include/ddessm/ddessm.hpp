#pragma once

#include "ddessm/core/error.hpp"
#include "ddessm/core/expsum.hpp"
#include "ddessm/core/sampled.hpp"
#include "ddessm/model/catalog.hpp"
#include "ddessm/model/constants.hpp"
#include "ddessm/model/linearize.hpp"
#include "ddessm/spectrum/spectrum.hpp"
#include "ddessm/projection/dichotomy.hpp"
#include "ddessm/projection/projection.hpp"
#include "ddessm/ssm/expansion.hpp"
#include "ddessm/ssm/normal_form.hpp"
#include "ddessm/inertial/certificate.hpp"
#include "ddessm/simulate/diagnostics.hpp"
#include "ddessm/io/output.hpp"
#include "ddessm/io/system_file.hpp"
