__version__ = '0.1.0'

from sbn3d.stack import *
from sbn3d.prox import *
from sbn3d.solver import *
from sbn3d.metrics import *
from sbn3d.detection import *
from sbn3d.tracking import *
from sbn3d.evaluation import *
from sbn3d.scene import *
from sbn3d.registration import *
from sbn3d.baselines import *
from sbn3d import io
from sbn3d import utils
