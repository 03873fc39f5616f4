#pragma once

#include "pulselab/kernel.hpp"
#include "pulselab/params.hpp"
#include "pulselab/trajectory.hpp"
#include "pulselab/quadrature.hpp"
#include "pulselab/roots.hpp"
#include "pulselab/analytic.hpp"
#include "pulselab/oracle.hpp"
#include "pulselab/fft.hpp"
#include "pulselab/barycentric.hpp"
#include "pulselab/spectral.hpp"
#include "pulselab/dynamics.hpp"
#include "pulselab/fit.hpp"
#include "pulselab/experiments.hpp"
#include "pulselab/io.hpp"
#include "pulselab/app.hpp"
