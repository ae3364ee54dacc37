#pragma once

#include "cstariff/activation.hpp"
#include "cstariff/calibration.hpp"
#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/ingest.hpp"
#include "cstariff/optimizer.hpp"
#include "cstariff/reporting.hpp"
#include "cstariff/study.hpp"
#include "cstariff/tariff_config.hpp"
#include "cstariff/tariff_engine.hpp"
#include "cstariff/vcl.hpp"
