#pragma once

#include "gdrate/certifier.hpp"
#include "gdrate/ellipsoid.hpp"
#include "gdrate/errors.hpp"
#include "gdrate/iqc.hpp"
#include "gdrate/linalg.hpp"
#include "gdrate/model.hpp"
#include "gdrate/report.hpp"
#include "gdrate/simulator.hpp"
