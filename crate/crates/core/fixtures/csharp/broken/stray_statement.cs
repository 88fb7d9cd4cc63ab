// expect: StatementOutsideType
using UnityEngine;

int lives = 3;

public class Lives : MonoBehaviour
{
    public int Count => 3;
}
