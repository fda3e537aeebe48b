#
# Two stage manufacturer / platform games of smart product innovation : printed equilibria, numerical oracle
# and comparative statics
#

from .base_utils import *
from .params import *
from .core_model import *
from .stages import *
from .roots import *
from .closed_form import *
from .oracle import *
from .statics import *
from .io import *
