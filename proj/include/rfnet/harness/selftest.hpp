#pragma once

namespace rfnet::harness {

// Runs the built-in verification suites (gradients, spectrum oracle,
// curvature, analytic signal checks, file-format round trips) and prints one
// line per check. Returns the number of failures. inject_grad_fault enables
// the test-fixture sign flip in the dense backward pass, which must make the
// gradient suite fail.
int run_selftest(bool inject_grad_fault = false);

}  // namespace rfnet::harness
