#ifndef SXI_SXI_HPP
#define SXI_SXI_HPP

#include "sxi/artifact.hpp"
#include "sxi/calibration.hpp"
#include "sxi/common.hpp"
#include "sxi/data.hpp"
#include "sxi/gbt.hpp"
#include "sxi/insights.hpp"
#include "sxi/lasso.hpp"
#include "sxi/learners.hpp"
#include "sxi/metrics.hpp"
#include "sxi/network.hpp"
#include "sxi/pipeline.hpp"
#include "sxi/pipeline_config.hpp"
#include "sxi/scoring.hpp"
#include "sxi/search.hpp"

#endif  // SXI_SXI_HPP
