x = a < b < c
#---
y = a and b and c or not d
#---
def f(a, b=2, *args, c, d=3, **kw) -> int:
    return a
#---
class C(B, metaclass=M):
    '''doc'''
    def m(self): pass
#---
x = [i * j for i in range(3) for j in xs if i if j]
#---
d = {k: v for k, v in items}
s = {1, 2}
e = {}
t = (1,)
g = (v for v in s)
#---
f = lambda x, y=1: x if y else -x
#---
try:
    pass
except ValueError as e:
    raise
except:
    pass
else:
    x = 1
finally:
    y = 2
#---
with open(p) as f, g:
    del a[0], b.c
#---
import os.path as p
from . import x
from a.b import (c, d as e)
#---
global g
async def h():
    await z
    async for i in q: pass
    async with r: pass
#---
x: int = 5
y += 1
a = b = 3
a, *b = c
#---
print(f'{x!r:>10} and {y}', 'a' 'b', b'\x00', 1.5e3, 0x1F, 3j, ...)
#---
assert x, 'm'
while True:
    break
else:
    continue
#---
if a:
    pass
elif b:
    pass
else:
    pass
#---
@dec
@dec2(1)
def f(): yield from g
#---
x = a[1:2, ::3]
y = not a is not b
z = a @ b ** -c // d % e << f >> g & h | i ^ ~j
#---
def gen():
    v = (yield)
    yield 1, 2
#---
x = a if b else c
y = (z := 3)
#---
def is_palindrome(text: str) -> bool:
    for i in range(len(text)):
        if text[i] != text[len(text) - 1 - i]:
            return False
    return True
#---
def is_palindrome(input_str: str) -> bool:
    return input_str == input_str[::-1]
#---
total = (1 +
         2)  # comment
value = 3 + \
    4
a = 1; b = 2;
#---
def outer(n):
    def inner(k=n, *, flag=False):
        nonlocal_value = [k] * n
        return {**kw, 'k': k}
    return inner(*args, **kw)
#---
for i, (a, b) in enumerate(pairs):
    if a in seen and b not in seen:
        seen.add(a)
    elif a == b != c:
        raise ValueError('x') from None
#---
n = int(input())
xs = list(map(int, input().split()))
print(sum(x for x in xs if x % 2 == 0), end='')
#---
class P:
    x: int
    def __init__(self, *a):
        self.a = a[-1] if a else None
        super().__init__()
#---
r = """multi
line""" + r'\d' + '''x'''
#---
if x:
    # only a comment


    y = 1
