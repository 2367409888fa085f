#pragma once

#include "jointsel/error.hpp"
#include "jointsel/dataset.hpp"
#include "jointsel/logistic_newton.hpp"
#include "jointsel/ridge_solver.hpp"
#include "jointsel/sample_selector.hpp"
#include "jointsel/joint_optimizer.hpp"
#include "jointsel/metrics.hpp"
#include "jointsel/cross_validation.hpp"
#include "jointsel/csv_io.hpp"
#include "jointsel/model_io.hpp"
#include "jointsel/synthetic.hpp"
