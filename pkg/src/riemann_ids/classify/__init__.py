from .lda import LdaModel, lda_decision, lda_fit, lda_predict
from .mdrm import MdrmModel, mdrm_distances, mdrm_fit, mdrm_predict, mdrm_score
from .neural import (
    AeModel,
    DenseNet,
    MlpModel,
    TrainConfig,
    TrainingError,
    ae_fit,
    ae_predict,
    ae_score,
    mlp_fit,
    mlp_predict,
    mlp_predict_proba,
)
