from .consistency import c_cons
from .crps import SampleFan, crps_point, crps_sum
from .entropy import VolatilityEntropyReport, token_entropy, volatility_vs_entropy_report
from .features import ConvBackbone, FeatureExtractor, train_feature_extractor
from .fid import fid
from .tstr import macro_f1, tstr_classification, tstr_forecasting
