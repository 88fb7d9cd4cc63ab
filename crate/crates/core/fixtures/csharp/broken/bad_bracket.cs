// expect: UnbalancedBrackets
using UnityEngine;

public class Grid : MonoBehaviour
{
    private int[] cells = new int[16;

    private void Start()
    {
        cells[0] = 1;
    }
}
