#pragma once

#include <rouf/error.hpp>
#include <rouf/trace.hpp>
#include <rouf/stl/formula.hpp>
#include <rouf/stl/parser.hpp>
#include <rouf/stl/monitor.hpp>
#include <rouf/sampling.hpp>
#include <rouf/discrepancy.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/ml/remote.hpp>
#include <rouf/params.hpp>
#include <rouf/parallel.hpp>
#include <rouf/analyzer/space.hpp>
#include <rouf/analyzer/approx.hpp>
#include <rouf/analyzer/regions.hpp>
#include <rouf/analyzer/analysis.hpp>
#include <rouf/cps/aebs.hpp>
#include <rouf/falsifier/validity.hpp>
#include <rouf/falsifier/targeted.hpp>
#include <rouf/falsifier/scenario.hpp>
#include <rouf/falsifier/pipeline.hpp>
