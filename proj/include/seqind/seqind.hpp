#pragma once

#include <seqind/commands.hpp>
#include <seqind/density.hpp>
#include <seqind/distribution.hpp>
#include <seqind/errors.hpp>
#include <seqind/exact_sum.hpp>
#include <seqind/experiment.hpp>
#include <seqind/format.hpp>
#include <seqind/independence.hpp>
#include <seqind/integrand.hpp>
#include <seqind/report.hpp>
#include <seqind/selection.hpp>
#include <seqind/seq_core.hpp>
#include <seqind/subsequence_index.hpp>
