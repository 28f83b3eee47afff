use super::{BackendError, Capabilities, PredictionBackend, Request, Role};
use crate::deepcoder::eval_program;
use crate::program::{Program, Subprogram};
use crate::robustfill::{eval_expr, INPUT_VAR};
use crate::value::{Limits, Value};

/// Reveals the ground truth's intermediate values as the single subgoal.
///
/// Stateless across requests: the step index selects the ground-truth step,
/// and its values are recomputed from the original inputs, which every
/// specification along a run still carries.
#[derive(Clone, Debug)]
pub struct TeacherBackend {
    ground_truth: Program,
    limits: Limits,
}

impl TeacherBackend {
    pub fn new(ground_truth: Program) -> Self {
        TeacherBackend {
            ground_truth,
            limits: Limits::DEFAULT,
        }
    }

    fn values(&self, req: &Request<'_>) -> Result<Vec<Value>, BackendError> {
        let len = self.ground_truth.len();
        if req.step >= len {
            return Err(BackendError::BeyondGroundTruth { step: req.step, len });
        }
        let fail = |e: &dyn std::fmt::Display| BackendError::GroundTruth(e.to_string());
        req.spec
            .examples()
            .iter()
            .map(|ex| match &self.ground_truth {
                Program::DeepCoder(p) => {
                    let inputs: Vec<Value> = ex.inputs.values().take(p.num_inputs()).cloned().collect();
                    let mut values = eval_program(p, &inputs, &self.limits).map_err(|e| fail(&e))?;
                    Ok(values.swap_remove(req.step))
                }
                Program::RobustFill(p) => {
                    let x = ex
                        .inputs
                        .get(INPUT_VAR)
                        .and_then(Value::as_str)
                        .ok_or_else(|| fail(&"no string input"))?;
                    eval_expr(&p.exprs()[req.step], x).map(Value::Str).map_err(|e| fail(&e))
                }
            })
            .collect()
    }
}

impl PredictionBackend for TeacherBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            subgoal: true,
            subprogram: false,
        }
    }

    fn subgoals(&mut self, req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError> {
        self.values(req).map(|v| vec![v])
    }

    fn subprograms(&mut self, _req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError> {
        Err(BackendError::Unsupported(Role::Subprogram))
    }
}
